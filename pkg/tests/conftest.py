import pytest

from meshla.config import ScenarioConfig, parse_config


def line_scenario(
    lam: float = 0.1,
    horizon: int = 200,
    warmup: int = 50,
    feedback: str = "binary-improvement",
    capacity: int = 10,
    load: float | None = None,
    channels: int = 2,
    num_radios: int = 1,
    count: int = 4,
    seed: int = 1,
    **engine_extra,
) -> ScenarioConfig:
    """4-node line with one end-to-end flow; the small workhorse scenario."""
    return parse_config(
        {
            "topology": {
                "kind": "line",
                "count": count,
                "spacing": 100.0,
                "tx_range": 120.0,
                "interference_range": 150.0,
                "num_radios": num_radios,
                "capacity": capacity,
            },
            "flows": {
                "preset": None,
                "items": [
                    {"src": 0, "dst": count - 1, "load": capacity / 2 if load is None else load}
                ],
            },
            "learning": {"lambda": lam},
            "engine": {
                "channels": channels,
                "horizon": horizon,
                "warmup": warmup,
                "seed": seed,
                "feedback": feedback,
                **engine_extra,
            },
        }
    )


def tiny_grid(
    side: int = 2,
    channels: int = 3,
    num_radios: int = 1,
    horizon: int = 30,
    warmup: int = 10,
    load: float = 2.0,
    seed: int = 1,
    **engine_extra,
) -> ScenarioConfig:
    """Small grid with the cross flow preset."""
    return parse_config(
        {
            "topology": {
                "kind": "grid",
                "side_count": side,
                "region_size": 300.0 * side,
                "tx_range": 320.0,
                "interference_range": 450.0,
                "num_radios": num_radios,
                "capacity": 10,
            },
            "flows": {"preset": "cross", "load": load},
            "learning": {"lambda": 0.2},
            "engine": {
                "channels": channels,
                "horizon": horizon,
                "warmup": warmup,
                "seed": seed,
                **engine_extra,
            },
        }
    )


@pytest.fixture
def line_config():
    return line_scenario()


@pytest.fixture
def grid_config():
    return tiny_grid()
