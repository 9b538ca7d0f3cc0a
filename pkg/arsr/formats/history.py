"""损失历史 CSV：epoch,mean_loss（epoch 从 1 开始）"""

import csv
import logging
import os

from arsr.exceptions import FileAccessError, FormatError

logger = logging.getLogger(__name__)

HEADER = ("epoch", "mean_loss")


def write_history(path: str | os.PathLike, history: list[float]) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(HEADER)
            for epoch, value in enumerate(history, start=1):
                writer.writerow((epoch, repr(float(value))))
    except OSError as exc:
        raise FileAccessError(path, "write", cause=exc) from exc
    logger.debug("wrote %s epochs of loss history to %s", len(history), path)


def read_history(path: str | os.PathLike) -> list[float]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise FileAccessError(path, "read", cause=exc) from exc
    if not rows or tuple(rows[0]) != HEADER:
        raise FormatError(path, reason=f"expected header {','.join(HEADER)}")
    try:
        return [float(row[1]) for row in rows[1:]]
    except (IndexError, ValueError) as exc:
        raise FormatError(path, reason="malformed loss row", cause=exc) from exc
