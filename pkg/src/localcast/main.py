from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from src.localcast.api.v1.endpoints import lowerbound, scenarios, trials
from src.localcast.core.config import settings

app = FastAPI(
    title="localcast",
    description="""
    Slotted wireless network simulator for local broadcast.

    ## Features
    * Generate and validate scenarios (SINR or protocol interference model)
    * Run single trials of LocalBroadcast1 / LocalBroadcast2
    * Evaluate the lower-bound harness on the two-region instance

    ## Documentation
    * Swagger UI: [/docs](/docs)
    * ReDoc: [/redoc](/redoc)
    """,
    version="1.0.0",
    docs_url="/docs",
    redoc_url="/redoc",
    openapi_url="/api/openapi.json",
    license_info={
        "name": "MIT",
    },
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=settings.ALLOWED_ORIGINS.split(","),
    allow_credentials=True,
    allow_methods=["GET", "POST", "OPTIONS"],
    allow_headers=["Content-Type"],
)

app.include_router(scenarios.router, prefix="/api/v1/scenarios", tags=["scenarios"])
app.include_router(trials.router, prefix="/api/v1/trials", tags=["trials"])
app.include_router(lowerbound.router, prefix="/api/v1/lowerbound", tags=["lowerbound"])


@app.get("/", tags=["root"])
async def root():
    return {
        "message": "localcast simulator API",
        "docs_url": "/docs",
        "redoc_url": "/redoc",
    }
