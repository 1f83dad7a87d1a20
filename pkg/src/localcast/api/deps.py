from typing import Optional

from fastapi import Depends, HTTPException, status

from src.localcast.core.config import Settings, get_settings, logger


def slot_limit(settings: Settings = Depends(get_settings)) -> int:
    return settings.API_MAX_SLOTS


def capped_max_slots(max_slots: Optional[int], limit: int) -> int:
    """
    Resolve the slot cap of an HTTP trial.

    Args:
        max_slots: Requested cap, None for the configured limit
        limit: Largest cap a request may ask for

    Returns:
        The cap to run with

    Raises:
        HTTPException: If the request asks for more than the limit
    """
    if max_slots is None:
        return limit
    if max_slots > limit:
        logger.warning(f"Rejected trial request with max_slots={max_slots} > {limit}")
        raise HTTPException(
            status_code=status.HTTP_400_BAD_REQUEST,
            detail=f"max_slots may not exceed {limit}",
        )
    return max_slots


def tmax_limit(settings: Settings = Depends(get_settings)) -> int:
    return settings.API_MAX_TMAX
