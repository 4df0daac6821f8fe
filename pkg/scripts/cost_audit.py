"""Per-iteration operation counts of CG, BB, CGNE and ORTHODIR."""
import sys

from gradhss.bench.cli import main

if __name__ == "__main__":
    quick = "--quick" in sys.argv
    problem = "cd3d:m=6" if quick else "cd3d:m=12"
    status = 0
    for method in ("CG", "BB", "CGNE", "ORTHODIR"):
        status |= main(["audit", "--method", method, "--problem", problem])
    sys.exit(status)
