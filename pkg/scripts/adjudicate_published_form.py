#!/usr/bin/env python3
"""Compare the machine-derived rational-family systems against the hand
transcription of their published form and print the term-by-term
adjudication."""

from contactlax.compat import match_printed_system


def main():
    for m, n in ((1, 1), (2, 1)):
        rep = match_printed_system(m, n)
        print(f"=== (m, n) = ({m}, {n}): {rep.verdict}")
        for line in rep.lines:
            mark = "match" if line.matched else "MISMATCH"
            print(f"  {line.label:10s} <- residue {line.derived_label:6s} {mark}")
            for t in line.diff_terms[:8]:
                print(f"      differs by: {t}")
            if len(line.diff_terms) > 8:
                print(f"      ... {len(line.diff_terms) - 8} more terms")
        print()


if __name__ == "__main__":
    main()
