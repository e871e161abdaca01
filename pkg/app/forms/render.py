from __future__ import annotations

from wtforms import BooleanField, Form, IntegerField, StringField
from wtforms.validators import DataRequired, InputRequired, Length, NumberRange, Optional, ValidationError

from app.dyadic import ONE, ZERO, parse_dyadic
from app.exceptions import BitCanvasError
from app.machines import MACHINES
from app.oracles import DEFAULT_MAX_PROBE
from app.renderer import SET_IDS
from app.utils.expressions import compile_expression

MAX_EVAL_PRECISION = 256
MAX_PIXEL_RESOLUTION = 24


class DyadicField(StringField):
    """A text field whose data is a :class:`~app.dyadic.Dyadic` parsed without floats."""

    def __init__(self, label=None, validators=None, default=None, **kwargs):
        super().__init__(label, validators, default=default, **kwargs)

    def process_formdata(self, valuelist):
        if not valuelist or not valuelist[0].strip():
            return
        try:
            self.data = parse_dyadic(valuelist[0])
        except BitCanvasError as exc:
            self.data = None
            raise ValueError(str(exc)) from exc

    def _value(self):
        return "" if self.data is None else str(self.data)


class EvalForm(Form):
    expr = StringField("Expression", validators=[DataRequired(), Length(max=200)])
    n = IntegerField("Precision", validators=[InputRequired(message="n is required"), NumberRange(min=0, max=MAX_EVAL_PRECISION)])

    oracle = None
    max_probe = DEFAULT_MAX_PROBE

    def validate_expr(self, field):
        try:
            self.oracle = compile_expression(field.data, self.max_probe)
        except BitCanvasError as exc:
            raise ValidationError(str(exc)) from exc


class PixelForm(Form):
    set_id = StringField("Set", validators=[DataRequired(), Length(max=40)])
    x = DyadicField("x", validators=[InputRequired(message="x is required")])
    y = DyadicField("y", default=ZERO)
    n = IntegerField("Resolution", validators=[Optional(), NumberRange(min=0, max=MAX_PIXEL_RESOLUTION)], default=4)
    radius = DyadicField("Radius", default=ONE)
    origin_x = DyadicField("Disk centre x", default=ZERO)
    origin_y = DyadicField("Disk centre y", default=ZERO)
    c_re = DyadicField("Re c", default=ZERO)
    c_im = DyadicField("Im c", default=ZERO)
    filled = BooleanField("Filled", default=False)

    def validate_set_id(self, field):
        if field.data in SET_IDS:
            return
        if field.data.startswith("graph:") and field.data[len("graph:"):] in MACHINES:
            return
        raise ValidationError(f"Unknown set. Choose one of {', '.join(SET_IDS)} or graph:<machine>.")

    def validate_radius(self, field):
        if field.data is not None and field.data <= ZERO:
            raise ValidationError("Radius must be positive.")
