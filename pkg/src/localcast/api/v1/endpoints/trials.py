from fastapi import APIRouter, Depends, HTTPException, status

from src.localcast.api.deps import capped_max_slots, slot_limit
from src.localcast.core.exceptions import LocalcastError
from src.localcast.schemas.experiment import TrialRequest, TrialResponse
from src.localcast.services.sim import run, summarize
from src.localcast.services.trace_service import serialize_outcome

router = APIRouter()


@router.post("/run", response_model=TrialResponse)
def run_trial(request: TrialRequest, limit: int = Depends(slot_limit)):
    """
    Run one trial of a scenario.

    Per-slot outcomes are only returned when include_outcomes is set.
    """
    max_slots = capped_max_slots(request.max_slots, limit)
    try:
        trace = run(
            request.scenario,
            request.variant,
            request.seed,
            max_slots,
            record_outcomes=request.include_outcomes,
        )
    except LocalcastError as e:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e))

    outcomes = None
    if request.include_outcomes:
        outcomes = [serialize_outcome(outcome) for outcome in trace.outcomes]
    return TrialResponse(summary=summarize(trace, request.scenario), outcomes=outcomes)
