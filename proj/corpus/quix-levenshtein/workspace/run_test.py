"""Runs one named case: python3 run_test.py <case>. Exit 0 on pass."""
import sys

from levenshtein import levenshtein

CASES = {
    'empty_source': (('', 'abc'), 3),
    'empty_target': (('abc', ''), 3),
    'single_sub': (('a', 'b'), 1),
    'identical_short': (('ab', 'ab'), 0),
    'kitten': (('kitten', 'sitting'), 3),
    'flaw': (('flaw', 'lawn'), 2),
    'last_char': (('abc', 'abd'), 1),
    'identical_word': (('same', 'same'), 0),
    'append': (('x', 'xy'), 1),
    'book': (('book', 'back'), 2),
}


def main():
    name = sys.argv[1]
    args, expected = CASES[name]
    got = levenshtein(*args)
    if got != expected:
        print("%s: levenshtein%r returned %r, expected %r" % (name, args, got, expected))
        sys.exit(1)


if __name__ == "__main__":
    main()
