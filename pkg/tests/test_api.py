from __future__ import annotations

from fractions import Fraction


def test_sets_lists_shapes_and_machines(client):
    response = client.get("/api/sets")
    assert response.status_code == 200
    data = response.get_json()
    assert "koch" in data["sets"]
    assert "graph:cbrt_g" in data["sets"]
    assert "exp_expm1" in data["machines"]


def test_eval(client):
    response = client.post("/api/eval", json={"expr": "1/3", "n": 16})
    assert response.status_code == 200
    data = response.get_json()
    assert data["expr"] == "1/3"
    assert abs(Fraction(data["value"]) - Fraction(1, 3)) < Fraction(1, 2**16)
    assert data["queries"] > 0
    assert data["bit_ops"] > 0


def test_eval_precision_zero_is_allowed(client):
    response = client.post("/api/eval", json={"expr": "pi", "n": 0})
    assert response.status_code == 200
    assert abs(Fraction(response.get_json()["value"]) - Fraction(314159, 100000)) < 1


def test_eval_field_errors(client):
    response = client.post("/api/eval", json={"expr": "log(2)"})
    assert response.status_code == 400
    fields = response.get_json()["fields"]
    assert "n" in fields
    assert "unknown function" in fields["expr"][0]

    response = client.post("/api/eval", json={"expr": "1", "n": 999})
    assert response.status_code == 400
    assert list(response.get_json()["fields"]) == ["n"]


def test_pixel(client):
    response = client.post("/api/pixel", json={"set_id": "disk", "x": "0", "y": 0, "n": 4})
    assert response.status_code == 200
    data = response.get_json()
    assert data["decision"] == 1
    assert data["diagnosis"] == "certified_in"
    assert data["x"] == "0*2^0"

    far = client.post("/api/pixel", json={"set_id": "circle", "x": "3", "radius": "1/2^1"}).get_json()
    assert far["decision"] == 0
    assert far["n"] == 4


def test_pixel_for_julia_parameter(client):
    response = client.post(
        "/api/pixel", json={"set_id": "julia", "x": "3", "n": 3, "c_re": "-1", "filled": True}
    )
    assert response.status_code == 200
    assert response.get_json()["diagnosis"] == "certified_out"


def test_pixel_field_errors(client):
    response = client.post("/api/pixel", json={"set_id": "torus", "x": "0.1", "radius": "-1"})
    assert response.status_code == 400
    fields = response.get_json()["fields"]
    assert set(fields) == {"set_id", "x", "radius"}
    assert "2^-32" in fields["x"][0]


def test_off_grid_pixel_is_unprocessable(client):
    response = client.post("/api/pixel", json={"set_id": "disk", "x": "1/2^9", "n": 4})
    assert response.status_code == 422
    data = response.get_json()
    assert data["type"] == "JobValidationError"
    assert "grid" in data["error"]


def test_json_errors(client):
    missing = client.get("/nope")
    assert missing.status_code == 404
    assert missing.get_json() == {"error": "Not Found"}
    wrong_method = client.get("/api/eval")
    assert wrong_method.status_code == 405
    assert wrong_method.get_json() == {"error": "Method Not Allowed"}


def test_pixel_for_an_offset_disk(client):
    body = {"set_id": "disk", "x": "2", "n": 4, "radius": "1/2^1", "origin_x": "2"}
    assert client.post("/api/pixel", json=body).get_json()["diagnosis"] == "certified_in"
    body["x"] = "0"
    assert client.post("/api/pixel", json=body).get_json()["decision"] == 0
