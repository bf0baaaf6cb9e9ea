#!/usr/bin/env python3
"""Serve the depth-fusion HTTP API. HOST, PORT and DEPTHFUSION_CONFIG come from the environment."""
import logging
import os

import uvicorn

from src.logs import setup_logging

setup_logging()
logger = logging.getLogger("start")

host = os.getenv("HOST", "0.0.0.0")
port = int(os.getenv("PORT", "8080"))
logger.info("serving depth fusion API on %s:%d", host, port)
uvicorn.run("src.main:app", host=host, port=port)
