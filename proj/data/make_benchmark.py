#!/usr/bin/env python3
"""Expand a list of observed positive triples into a fully labeled triple file.

Every (lhs, rel, rhs) combination over the entities and relation types seen
in the input becomes one record; observed triples are labeled 1, all others 0.
Also writes a manifest next to the triple file.
"""
import argparse
import itertools
import pathlib


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("positives", type=pathlib.Path, help="tab-separated lhs/rel/rhs lines")
    parser.add_argument("out_dir", type=pathlib.Path)
    parser.add_argument("--name", required=True)
    parser.add_argument("--folds", type=int, default=10)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    observed = set()
    entities = set()
    relations = set()
    for line in args.positives.read_text(encoding="utf-8").splitlines():
        if not line or line.startswith("#"):
            continue
        lhs, rel, rhs = line.split("\t")
        observed.add((lhs, rel, rhs))
        entities.update((lhs, rhs))
        relations.add(rel)

    entities = sorted(entities)
    relations = sorted(relations)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    triples_path = args.out_dir / f"{args.name}.tsv"
    with triples_path.open("w", encoding="utf-8", newline="\n") as out:
        out.write(f"# {args.name}: {len(entities)} entities, {len(relations)} relation types\n")
        for lhs, rel, rhs in itertools.product(entities, relations, entities):
            label = 1 if (lhs, rel, rhs) in observed else 0
            out.write(f"{lhs}\t{rel}\t{rhs}\t{label}\n")

    manifest = args.out_dir / f"{args.name}.manifest"
    manifest.write_text(
        f"name = {args.name}\ntriples = {triples_path.name}\nfolds = {args.folds}\nseed = {args.seed}\n",
        encoding="utf-8",
    )


if __name__ == "__main__":
    main()
