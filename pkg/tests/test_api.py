import pytest
from fastapi.testclient import TestClient

from api.routers.approximants import get_solver_service
from main import app
from services.solver_service import SolverService


@pytest.fixture
def client(coarse_settings):
    service = SolverService(settings=coarse_settings)
    app.dependency_overrides[get_solver_service] = lambda: service
    with TestClient(app) as client:
        yield client
    app.dependency_overrides.clear()
    service.close()


def test_root_lists_endpoints(client):
    response = client.get("/")
    assert response.status_code == 200
    assert "/api/v1/solve" in response.json()["endpoints"]


def test_problems(client):
    response = client.get("/api/v1/problems")
    assert response.status_code == 200
    assert len(response.json()["problems"]) == 9


def test_solve(client):
    response = client.post("/api/v1/solve", json={"problem": "kink", "order": 4, "epsilon": 1.0})
    assert response.status_code == 200
    body = response.json()
    assert body["theta"]["a1"] == pytest.approx(2.0, abs=1e-7)
    assert body["order"] == 4


def test_solve_unknown_problem_is_bad_request(client):
    response = client.post("/api/v1/solve", json={"problem": "duffing", "order": 3})
    assert response.status_code == 400
    assert response.json()["detail"]["error_type"] == "unknown_problem"


def test_solve_rejects_order_zero(client):
    response = client.post("/api/v1/solve", json={"problem": "bell", "order": 0})
    assert response.status_code == 422


def test_table_with_failed_order(client):
    response = client.post(
        "/api/v1/table", json={"problem": "logistic", "orders": [2, 3], "epsilons": [1.0]}
    )
    assert response.status_code == 200
    body = response.json()
    assert body["columns"] == ["k", "D"]
    assert body["rows"][0] == {"k": 2, "D": None}
    assert body["rows"][1]["D"] < 1e-8


def test_unknown_table_name_is_bad_request(client):
    response = client.post("/api/v1/table", json={"name": "table9"})
    assert response.status_code == 400
