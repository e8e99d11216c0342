import sys

from scripts import run, simulate, skeleton, rate, verify, mc_ldp, converge_i, converge_ii

commands = {
    "run": run.main,
    "simulate": simulate.main,
    "skeleton": skeleton.main,
    "rate": rate.main,
    "verify": verify.main,
    "mc-ldp": mc_ldp.main,
    "converge-i": converge_i.main,
    "converge-ii": converge_ii.main,
}

if __name__ == "__main__":
    if len(sys.argv) < 2 or sys.argv[1] not in commands:
        print(f"Please specify a command to execute: [{', '.join(commands.keys())}]")
        sys.exit(1)
    sys.exit(commands[sys.argv[1]](sys.argv[2:]))
