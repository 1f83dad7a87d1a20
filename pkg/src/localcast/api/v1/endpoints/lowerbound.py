from dataclasses import asdict

from fastapi import APIRouter, Depends, HTTPException, status

from src.localcast.api.deps import tmax_limit
from src.localcast.core.exceptions import LocalcastError
from src.localcast.schemas.experiment import BoundRowOut, LowerBoundConfig, LowerBoundResponse
from src.localcast.services.lowerbound import bound_table, parse_policy

router = APIRouter()


@router.post("/run", response_model=LowerBoundResponse)
def run_lowerbound(config: LowerBoundConfig, limit: int = Depends(tmax_limit)):
    """Per-slot exact probabilities against their bounds on the two-region instance."""
    if config.t_max > limit:
        raise HTTPException(
            status_code=status.HTTP_400_BAD_REQUEST,
            detail=f"t_max may not exceed {limit}",
        )
    try:
        policy = parse_policy(config.policy, config.n, config.sparse)
        report = bound_table(config.n, policy, config.t_max, config.sparse, config.j_cap)
    except LocalcastError as e:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e))
    return LowerBoundResponse(
        n=report.n,
        j=report.j,
        j_unconstrained=report.j_unconstrained,
        delta=report.delta,
        sparse=report.sparse,
        weights=report.weights,
        all_hold=report.all_hold,
        rows=[BoundRowOut(**asdict(row)) for row in report.rows],
    )
