import argparse
from pathlib import Path


def parser(description: str, default_out: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--out-dir", type=Path, default=Path("results"), help="directory for CSV outputs")
    p.add_argument("--name", default=default_out, help="CSV file name")
    return p
