"""HSS-CG, HSS-BB and ORTHODIR on the m = 40 grid with gamma = 1."""
from _common import finish, parser, run_kind

if __name__ == "__main__":
    args = parser(__doc__, "solver_race").parse_args()
    finish(run_kind("solver-race", {"problem": "cd3d:m=20" if args.quick else "cd3d:m=40",
                                    "reps": 1 if args.quick else 10, "out": args.out}))
