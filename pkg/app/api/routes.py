from __future__ import annotations

from http import HTTPStatus

from flask import Blueprint, current_app, jsonify, request
from werkzeug.datastructures import MultiDict

from app.dyadic import Dyadic
from app.extensions import limiter
from app.forms.render import EvalForm, PixelForm
from app.machines import MACHINES
from app.renderer import SET_IDS, RenderJob, RenderSettings, ShapeParams, build_decision, escape_params_from_config
from app.utils.costs import metered

api_bp = Blueprint("api", __name__)

# the step graph is clipped to the job window; keep it far from the queried pixel
PIXEL_WINDOW_HALF_WIDTH = Dyadic(16)


@api_bp.before_request
def apply_rate_limit():
    limiter.check()


def _form_data(payload: dict) -> MultiDict:
    data = MultiDict()
    for key, value in payload.items():
        if isinstance(value, bool):
            data.add(key, "true" if value else "false")
        elif value is not None:
            data.add(key, str(value))
    return data


def _form_errors(form) -> dict:
    return {"error": "Invalid request", "fields": {name: errors for name, errors in form.errors.items()}}


@api_bp.route("/sets", methods=["GET"])
@limiter.limit("60 per minute")
def list_sets():
    return jsonify(
        {
            "sets": list(SET_IDS) + [f"graph:{machine_id}" for machine_id in MACHINES],
            "machines": list(MACHINES),
        }
    )


@api_bp.route("/eval", methods=["POST"])
@limiter.limit("30 per minute")
def evaluate():
    payload = request.get_json(force=True, silent=True) or {}
    form = EvalForm(_form_data(payload))
    form.max_probe = current_app.config["DIVISION_MAX_PROBE"]
    if not form.validate():
        return jsonify(_form_errors(form)), HTTPStatus.BAD_REQUEST

    with metered() as meter:
        value = form.oracle.query(form.n.data)
    return jsonify(
        {
            "expr": form.expr.data,
            "n": form.n.data,
            "value": value.to_decimal(),
            "dyadic": str(value),
            "queries": meter.queries,
            "bit_ops": meter.bit_ops,
        }
    )


@api_bp.route("/pixel", methods=["POST"])
@limiter.limit("30 per minute")
def pixel():
    payload = request.get_json(force=True, silent=True) or {}
    form = PixelForm(_form_data(payload))
    if not form.validate():
        return jsonify(_form_errors(form)), HTTPStatus.BAD_REQUEST

    config = current_app.config
    job = RenderJob(
        set_id=form.set_id.data,
        center=(form.x.data, form.y.data),
        n=form.n.data,
        half_width=PIXEL_WINDOW_HALF_WIDTH,
        escape=escape_params_from_config(config),
        shape=ShapeParams(
            radius=form.radius.data,
            origin=(form.origin_x.data, form.origin_y.data),
            c=(form.c_re.data, form.c_im.data),
            filled=form.filled.data,
        ),
    )
    job.validate()
    decision = build_decision(job, RenderSettings.from_config(config))
    with metered() as meter:
        verdict = decision.verdict(job.center, job.n)
    return jsonify(
        {
            "set": job.set_id,
            "x": str(job.center[0]),
            "y": str(job.center[1]),
            "n": job.n,
            "decision": verdict.decision,
            "diagnosis": verdict.diagnosis.value,
            "subdivisions": verdict.subdivisions,
            "bit_ops": meter.bit_ops,
        }
    )
