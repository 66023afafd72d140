"""
FastAPI server exposing netlist simulation and apparatus builds over HTTP.

Run (from project root):
uv run python -m src.api.server
"""

from typing import Any
from pathlib import Path
import time

from dotenv import load_dotenv
from fastapi import Depends, FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
import uvicorn

# Local imports
from src.builders.registry import BuilderRegistry, create_default_registry
from src.core.config import API_CORS_ORIGINS, API_PORT, LOG_KEEP_RECENT
from src.core.errors import OamlabError
from src.core.utils import setup_logging
from src.measurement.statistics import probabilities
from src.models.api import BuildRequest, SimulateRequest
from src.models.report import RunReport
from src.netlist.emitter import emit
from src.netlist.parser import parse
from src.optics.sequences import parse_state_spec

# Get project root (parent of src/api/)
PROJECT_ROOT = Path(__file__).parent.parent.parent

# Setup logging
logger = setup_logging(PROJECT_ROOT, keep_recent=LOG_KEEP_RECENT)

# Load environment variables from .env file
load_dotenv()

app = FastAPI(title="oamlab API")

app.add_middleware(
    CORSMiddleware,
    allow_origins=API_CORS_ORIGINS,
    allow_methods=["GET", "POST"],
    allow_headers=["*"],
)

# Exit code -> HTTP status
_STATUS = {2: 400, 3: 422, 4: 422, 5: 400}


def _http_error(error: OamlabError) -> HTTPException:
    return HTTPException(status_code=_STATUS.get(error.exit_code, 400), detail=str(error))


@app.on_event("startup")
async def startup_event() -> None:
    """Create the builder registry once and store it in app.state"""
    app.state.registry = create_default_registry()
    logger.info(f"Registered {len(app.state.registry)} apparatus builders")


async def get_registry() -> BuilderRegistry:
    """Dependency that provides the builder registry"""
    registry = getattr(app.state, "registry", None)
    if registry is None:
        raise HTTPException(status_code=503, detail="Registry not initialized. Server is starting up.")
    return registry


@app.get("/")
async def root() -> dict[str, str]:
    """Health check endpoint"""
    return {"status": "ok", "message": "oamlab API is running"}


@app.get("/api/apparatus")
async def list_apparatus(registry: BuilderRegistry = Depends(get_registry)) -> dict[str, str]:
    """Registered apparatus names with one-line descriptions"""
    return registry.describe()


@app.post("/api/simulate")
async def simulate_netlist(request: SimulateRequest) -> dict[str, Any]:
    """Detector distribution of a netlist for one input state."""
    started = time.perf_counter()
    try:
        circuit = parse(request.netlist)
        port = request.source or (circuit.sources[0] if len(circuit.sources) == 1 else "in")
        state = parse_state_spec(request.input, request.seq, path=port)
        dist = probabilities(circuit, state)
    except OamlabError as e:
        logger.info(f"Simulate request rejected: {e}")
        raise _http_error(e) from e

    report = RunReport(
        command="simulate",
        config={"input": request.input, "source": port, "seq": request.seq.model_dump(mode="json")},
        distribution=dist,
        wall_time=time.perf_counter() - started,
    )
    return report.model_dump(mode="json", by_alias=True, exclude_none=True)


@app.post("/api/build")
async def build_apparatus(request: BuildRequest, registry: BuilderRegistry = Depends(get_registry)) -> dict[str, Any]:
    """Build and verify an apparatus; returns its netlists and the verification report."""
    started = time.perf_counter()
    try:
        result, verification = registry.build_and_verify(request.apparatus, **request.params)
    except OamlabError as e:
        logger.info(f"Build request rejected: {e}")
        raise _http_error(e) from e

    report = RunReport(
        command="build",
        config={"apparatus": request.apparatus, "params": request.params},
        verification=verification.to_dict(),
        results={"netlists": {key: emit(circuit) for key, circuit in result.circuits().items()}},
        wall_time=time.perf_counter() - started,
    )
    return report.model_dump(mode="json", by_alias=True, exclude_none=True)


if __name__ == "__main__":
    print("Starting oamlab API Server...")
    print(f"API: http://localhost:{API_PORT}")
    uvicorn.run(app, host="0.0.0.0", port=API_PORT, log_level="info")
