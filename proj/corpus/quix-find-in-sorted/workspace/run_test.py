"""Runs one named case: python3 run_test.py <case>. Exit 0 on pass."""
import sys

from find_in_sorted import find_in_sorted

CASES = {
    'dup_run': (([3, 4, 5, 5, 5, 5, 6], 5), 3),
    'absent_mid': (([1, 2, 3, 4, 6, 7, 8], 5), -1),
    'present_left': (([1, 2, 3, 4, 6, 7, 8], 4), 3),
    'even_len': (([2, 4, 6, 8, 10, 12, 14, 16, 18, 20], 18), 8),
    'below_all': (([3, 5, 6, 7, 8, 9, 12, 13, 14, 24, 26, 27], 0), -1),
    'dup_pair': (([3, 5, 6, 7, 8, 9, 12, 12, 14, 24, 26, 27], 12), 6),
    'above_all': (([24, 26, 28, 50, 59], 101), -1),
    'singleton': (([1], 1), 0),
    'empty': (([], 7), -1),
    'last_of_two': (([1, 3], 3), 1),
}


def main():
    name = sys.argv[1]
    args, expected = CASES[name]
    got = find_in_sorted(*args)
    if got != expected:
        print("%s: find_in_sorted%r returned %r, expected %r" % (name, args, got, expected))
        sys.exit(1)


if __name__ == "__main__":
    main()
