from fastapi import APIRouter, Body, HTTPException, status

from src.localcast.core.exceptions import LocalcastError
from src.localcast.schemas.experiment import GeneratorSpec, ScenarioReport
from src.localcast.schemas.scenario import Scenario, parse_scenario
from src.localcast.services.geometry import cover_constant, transmission_count
from src.localcast.services.scenario_service import generate_scenario

router = APIRouter()


def scenario_report(scenario: Scenario) -> ScenarioReport:
    return ScenarioReport(
        nodes=len(scenario.nodes),
        n_bound=scenario.n_bound,
        model="protocol" if scenario.is_protocol else "sinr",
        r_t=scenario.phys.r_t,
        r_b=scenario.phys.r_b,
        cover_constant=cover_constant(scenario.phys),
        max_n_x=max((transmission_count(scenario, x) for x in scenario.node_ids), default=0),
    )


@router.post("/generate", response_model=Scenario, status_code=status.HTTP_201_CREATED)
def generate(spec: GeneratorSpec):
    """
    Generate a scenario from a generator spec.

    The same spec always produces the same scenario.
    """
    try:
        return generate_scenario(spec)
    except LocalcastError as e:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e))


@router.post("/validate", response_model=ScenarioReport)
def validate(data: dict = Body(...)):
    """Validate a scenario document and report its derived radii and densest region."""
    try:
        return scenario_report(parse_scenario(data))
    except LocalcastError as e:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e))
