import os
import logging
import configparser
from enum import Enum
from typing import Dict, Any
from logging.handlers import RotatingFileHandler

LOG_FILE = "mgc.log"
CONFIG_FILE = "mgc.ini"

DEFAULTS: Dict[str, Any] = {
    "depth_cap": 24,
    "precision": 8,
    "chain_budget": 4096,
    "nmax": 6,
    "fuzz_seeds": 200,
    "seed": 0,
}


class Ring(Enum):
    Z = "Z"
    ZP = "Zp"
    Q = "Q"


class Flavor(Enum):
    I = "I"  # noqa: E741
    IP = "Ip"
    MIXED = "mixed"


def get_logger(name: str = "mgc") -> logging.Logger:
    """Return a logger writing to the rotating mgc.log file.

    The level comes from the MGC_LOG environment variable (default WARNING).
    """
    logger = logging.getLogger(name)
    level = os.environ.get("MGC_LOG", "WARNING").upper()
    logger.setLevel(getattr(logging, level, logging.WARNING))
    if not any(isinstance(h, RotatingFileHandler) for h in logger.handlers):
        handler = RotatingFileHandler(
            LOG_FILE, maxBytes=5 * 1024 * 1024, backupCount=3, delay=True
        )
        FORMAT = "%(asctime)-15s %(message)s"
        fmt = logging.Formatter(FORMAT, datefmt="%m/%d/%Y %I:%M:%S %p")
        handler.setFormatter(fmt)
        logger.addHandler(handler)
    return logger


def load_config(path: str = CONFIG_FILE) -> Dict[str, int]:
    """Read integer settings from the [DEFAULT] section of mgc.ini.

    :param path: configuration file; a missing file yields the defaults
    :return: dictionary with every key of DEFAULTS
    """
    config = configparser.ConfigParser()
    config.read(path)
    settings = dict(DEFAULTS)
    for key in DEFAULTS:
        if key in config["DEFAULT"]:
            settings[key] = int(config["DEFAULT"][key])
    return settings
