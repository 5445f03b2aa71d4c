"""Runs one named case: python3 run_test.py <case>. Exit 0 on pass."""
import sys

from sieve import sieve

CASES = {
    'up_to_1': ((1,), []),
    'up_to_2': ((2,), [2]),
    'up_to_10': ((10,), [2, 3, 5, 7]),
    'up_to_30': ((30,), [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]),
}


def main():
    name = sys.argv[1]
    args, expected = CASES[name]
    got = sieve(*args)
    if got != expected:
        print("%s: sieve%r returned %r, expected %r" % (name, args, got, expected))
        sys.exit(1)


if __name__ == "__main__":
    main()
