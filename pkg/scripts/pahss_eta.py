"""Preadaptive HSS on the m = 16 grid for several estimation budgets eta."""
from _common import finish, parser, run_kind

if __name__ == "__main__":
    args = parser(__doc__, "pahss_eta").parse_args()
    finish(run_kind("pahss", {"problem": "cd3d:m=10" if args.quick else "cd3d:m=16",
                              "etas": "5,10,20,50,100", "reps": 5, "out": args.out}))
