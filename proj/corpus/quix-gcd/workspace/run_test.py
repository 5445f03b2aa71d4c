"""Runs one named case: python3 run_test.py <case>. Exit 0 on pass."""
import sys

from gcd import gcd

CASES = {
    'coprime_mix': ((35, 21), 7),
    'equal': ((13, 13), 13),
    'multiple': ((100, 75), 25),
    'zero_b': ((17, 0), 17),
}


def main():
    name = sys.argv[1]
    args, expected = CASES[name]
    got = gcd(*args)
    if got != expected:
        print("%s: gcd%r returned %r, expected %r" % (name, args, got, expected))
        sys.exit(1)


if __name__ == "__main__":
    main()
