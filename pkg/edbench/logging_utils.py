import datetime
import logging
from pathlib import Path
from typing import Optional

LOG_FORMAT = "# %(name)s - %(levelname)s - %(message)s"


def configure_logging(log_file: Optional[Path] = None, level: str = "INFO") -> None:
    """
    Configure root logging for a pipeline run.

    Messages go to the console and, when ``log_file`` is given, are appended to it.

    Args:
        log_file (Path, optional): File that receives a copy of every message
        level (str): Logging level name
    """
    handlers = [logging.StreamHandler()]
    if log_file is not None:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(filename=log_file, mode="a"))

    logging.root.handlers = []  # drop handlers installed by others
    logging.basicConfig(level=getattr(logging, level.upper(), logging.INFO), handlers=handlers, format=LOG_FORMAT)

    logging.getLogger("edbench").info(
        "#" * 20 + " Run started on " + datetime.datetime.now().strftime("%Y-%m-%d %H:%M:%S") + " " + "#" * 20
    )
