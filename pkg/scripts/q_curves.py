"""Q_n(alpha) curves of steepest descent on the eight-value diagonal."""
from _common import finish, parser, run_kind

if __name__ == "__main__":
    args = parser(__doc__, "q_curves").parse_args()
    finish(run_kind("gradient-trace", {"problem": "diag8", "rhs": "from-solution",
                                       "iters": 30 if args.quick else 500, "out": args.out}))
