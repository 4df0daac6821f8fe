"""Outer HSS iterations over a grid of shifts and grid sizes."""
from _common import finish, parser, run_kind

if __name__ == "__main__":
    args = parser(__doc__, "gamma_sweep").parse_args()
    sizes = "9,12" if args.quick else "9,11,13,15,17,19,21"
    finish(run_kind("gamma-sweep", {"sizes": sizes, "out": args.out}))
