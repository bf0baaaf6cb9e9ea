import logging

LOG_FORMAT = "%(levelname)-5.5s [%(name)s] %(message)s"


def setup_logging(verbose: bool = False) -> None:
    """Configure the root logger once for the CLI and the HTTP app."""
    logging.basicConfig(level=logging.DEBUG if verbose else logging.INFO, format=LOG_FORMAT)
