"""Launch the HTTP service from environment configuration.

Configuration comes from EDITTRACE_* variables (see edittrace.config);
positional overrides: store dir, host, port.

Usage: python scripts/run_service.py [store_dir] [host] [port]
"""

from __future__ import annotations

import sys
from pathlib import Path

import uvicorn

from edittrace.config import EngineConfig
from edittrace.service import create_app


def main() -> None:
    config = EngineConfig.from_env()
    if len(sys.argv) > 1:
        config.store_dir = Path(sys.argv[1])
    if config.store_dir is None:
        config.store_dir = Path("demo_store")
    host = sys.argv[2] if len(sys.argv) > 2 else "127.0.0.1"
    port = int(sys.argv[3]) if len(sys.argv) > 3 else 8040
    uvicorn.run(create_app(config), host=host, port=port)


if __name__ == "__main__":
    main()
