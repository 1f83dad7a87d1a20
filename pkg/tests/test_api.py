def test_root(client):
    response = client.get("/")
    assert response.status_code == 200
    assert response.json()["docs_url"] == "/docs"


def test_generate_scenario(client):
    response = client.post("/api/v1/scenarios/generate", json={"kind": "uniform_square", "n": 8, "seed": 4})
    assert response.status_code == 201
    body = response.json()
    assert len(body["nodes"]) == 8
    assert body["n_bound"] == 8


def test_generate_infeasible(client):
    response = client.post("/api/v1/scenarios/generate", json={"kind": "uniform_square", "n": 64, "density": 1e14})
    assert response.status_code == 400


def test_validate_reports_radii(client):
    document = {"n_bound": 4, "nodes": [{"id": 0, "x": 0, "y": 0}, {"id": 1, "x": 0.1, "y": 0}]}
    response = client.post("/api/v1/scenarios/validate", json=document)
    assert response.status_code == 200
    body = response.json()
    assert body["r_t"] == 1.0
    assert body["max_n_x"] == 2
    assert body["model"] == "sinr"


def test_validate_rejects_duplicates(client):
    document = {"n_bound": 4, "nodes": [{"id": 0, "x": 0, "y": 0}, {"id": 0, "x": 1, "y": 0}]}
    response = client.post("/api/v1/scenarios/validate", json=document)
    assert response.status_code == 400
    assert "distinct" in response.json()["detail"]


def test_run_trial(client):
    scenario = {"n_bound": 2, "nodes": [{"id": 0, "x": 0, "y": 0}, {"id": 1, "x": 10, "y": 0}]}
    response = client.post(
        "/api/v1/trials/run",
        json={"scenario": scenario, "variant": "alg1", "seed": 1, "include_outcomes": True},
    )
    assert response.status_code == 200
    body = response.json()
    assert len(body["summary"]["nodes"]) == 2
    assert len(body["outcomes"]) == body["summary"]["slots_run"]


def test_run_trial_slot_limit(client):
    scenario = {"n_bound": 2, "nodes": [{"id": 0, "x": 0, "y": 0}]}
    response = client.post("/api/v1/trials/run", json={"scenario": scenario, "max_slots": 10**9})
    assert response.status_code == 400


def test_lowerbound(client):
    response = client.post("/api/v1/lowerbound/run", json={"n": 256, "policy": "fixed:auto", "t_max": 16})
    assert response.status_code == 200
    body = response.json()
    assert body["all_hold"]
    assert len(body["rows"]) == 16
    assert body["j"] <= 2


def test_lowerbound_bad_policy(client):
    response = client.post("/api/v1/lowerbound/run", json={"n": 256, "policy": "fixed:7", "t_max": 16})
    assert response.status_code == 400


def test_lowerbound_validation(client):
    response = client.post("/api/v1/lowerbound/run", json={"n": 100})
    assert response.status_code == 422
