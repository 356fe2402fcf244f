import pytest
from fastapi.testclient import TestClient

from smellhunter.gateway import GatewayConfig, build_app
from smellhunter.platform import Platform

GOD_CLASS_SCRIPT = (
    "smell GodClass {\n"
    "  severity high\n"
    "  when wmc >= $WMC_VERY_HIGH and atfd > $FEW and tcc < $ONE_THIRD\n"
    "}\n"
)

METRICS_CSV = (
    "entity_id,wmc,atfd,tcc\n"
    "OrderManager,50,6,0.2\n"
    "Invoice,12,1,0.8\n"
    "AuditTrail,47,6,0.4\n"
)

THRESHOLDS_JSON = '{"WMC_VERY_HIGH": 47, "FEW": 5, "ONE_THIRD": 0.33}'

METADATA_JSON = (
    '{"user_id": "u-1", "org_id": "acme", "project_id": "shop",'
    ' "file_path": "src/orders.py", "language": "python",'
    ' "latitude": 48.137, "longitude": 11.575}'
)


def multipart(**overrides):
    """Multipart body for POST /analyses; override or drop parts by name."""
    parts = {
        "script": GOD_CLASS_SCRIPT.encode(),
        "metrics": METRICS_CSV.encode(),
        "thresholds": THRESHOLDS_JSON.encode(),
        "metadata": METADATA_JSON.encode(),
    }
    parts.update(overrides)
    return {name: (name, data) for name, data in parts.items() if data is not None}


@pytest.fixture
def platform(tmp_path):
    with Platform(tmp_path / "store") as running:
        yield running


@pytest.fixture
def client(tmp_path, platform):
    app = build_app(GatewayConfig(store_dir=tmp_path / "store"), platform=platform)
    with TestClient(app) as test_client:
        yield test_client
