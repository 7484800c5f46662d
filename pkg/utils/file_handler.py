import json
import logging
import os
from datetime import datetime

import chardet
import numpy as np
import pandas as pd

from utils.errors import ZeroTableParseError

logger = logging.getLogger(__name__)

ZERO_TABLE_HEADER = "# positive ordinates of nontrivial zeta zeros, ascending"


def convert_to_serializable(obj):
    """Convert object to JSON serializable format"""
    if isinstance(obj, (np.integer,)):
        return int(obj)
    elif isinstance(obj, (np.floating,)):
        return float(obj)
    elif isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    elif isinstance(obj, np.ndarray):
        return [convert_to_serializable(v) for v in obj.tolist()]
    elif isinstance(obj, np.bool_):
        return bool(obj)
    elif hasattr(obj, "as_dict"):
        return convert_to_serializable(obj.as_dict())
    elif isinstance(obj, dict):
        return {k: convert_to_serializable(v) for k, v in obj.items()}
    elif isinstance(obj, (list, tuple)):
        return [convert_to_serializable(item) for item in obj]
    elif isinstance(obj, float) and not np.isfinite(obj):
        return None
    else:
        return obj


class FileHandler:
    def __init__(self, output_folder=None):
        self.output_folder = output_folder
        if output_folder and not os.path.exists(output_folder):
            os.makedirs(output_folder)

    def resolve(self, filename):
        if self.output_folder is None or os.path.isabs(filename):
            return filename
        return os.path.join(self.output_folder, filename)

    def detect_encoding(self, filepath):
        """Detect file encoding with chardet, falling back to UTF-8"""
        with open(filepath, 'rb') as f:
            raw_data = f.read(100000)
        if not raw_data:
            return 'utf-8'
        result = chardet.detect(raw_data)
        encoding = result.get('encoding')
        confidence = result.get('confidence') or 0.0
        logger.debug("detected encoding %s (confidence %.2f) for %s", encoding, confidence, filepath)
        if not encoding or confidence <= 0.7 or encoding.lower() == 'ascii':
            return 'utf-8'
        return encoding

    def read_zero_table(self, filepath):
        """
        Parse a zero-table file: one positive decimal ordinate per line,
        '#' starts a comment. Returns a float array in file order.
        """
        encoding = self.detect_encoding(filepath)
        values = []
        with open(filepath, 'r', encoding=encoding) as f:
            for line_number, line in enumerate(f, start=1):
                text = line.split('#', 1)[0].strip()
                if not text:
                    continue
                fields = text.split()
                if len(fields) != 1:
                    raise ZeroTableParseError(f"expected one number, got {len(fields)} fields", line_number)
                try:
                    value = float(fields[0])
                except ValueError:
                    raise ZeroTableParseError(f"not a number: {fields[0]!r}", line_number) from None
                if not np.isfinite(value):
                    raise ZeroTableParseError(f"non-finite ordinate {fields[0]!r}", line_number)
                values.append(value)
        logger.info("read %d ordinates from %s", len(values), filepath)
        return np.array(values, dtype=np.float64)

    def save_zero_table(self, ordinates, filename, note=None):
        filepath = self.resolve(filename)
        with open(filepath, 'w', encoding='utf-8') as f:
            f.write(ZERO_TABLE_HEADER + "\n")
            if note:
                f.write(f"# {note}\n")
            for value in ordinates:
                f.write(f"{value:.12f}\n")
        return filepath

    def save_table(self, df, filename):
        """Save a result frame as CSV"""
        filepath = self.resolve(filename)
        df.to_csv(filepath, index=False)
        return filepath

    def save_report(self, report, filename):
        """Save a verification report as JSON"""
        filepath = self.resolve(filename)
        with open(filepath, 'w', encoding='utf-8') as f:
            json.dump(convert_to_serializable(report), f, indent=2)
        return filepath


def report_stamp():
    return datetime.now().isoformat(timespec='seconds')


def frame_from_rows(rows, columns=None):
    return pd.DataFrame(rows, columns=columns)
