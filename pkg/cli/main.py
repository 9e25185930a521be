#!/usr/bin/env python3
"""
Command-line entry point for the policy PMC pipeline.

    python -m cli.main ingest   --manifest data/corpus/manifest.yaml
    python -m cli.main keywords --manifest ... --top 10 [--method freq]
    python -m cli.main coword   --manifest ...
    python -m cli.main cluster  --manifest ... --k-clusters 4
    python -m cli.main suggest  --manifest ... --schema ...
    python -m cli.main score    --scorecards data/scorecards/golden.csv [--manifest ...]
    python -m cli.main report   --out out [--manifest ...]
    python -m cli.main run      --manifest ... --scorecards ...

Exit codes: 0 success, 1 unexpected failure, 2 input validation or usage
error, 3 computation error.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from cli.commands import COMMANDS
from cli.config import METHODS, TEXTRANK_SCOPES, build_config
from core.errors import EXIT_UNEXPECTED, PipelineError

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def configure_logging(level: str = "INFO", log_file: Optional[Path] = None) -> None:
    handlers: List[logging.Handler] = [logging.StreamHandler()]
    if log_file is not None:
        handlers.append(logging.FileHandler(log_file, encoding="utf-8"))
    logging.basicConfig(level=getattr(logging, level.upper(), logging.INFO), format=LOG_FORMAT,
                        handlers=handlers, force=True)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    # every flag defaults to None so config-file values survive unless overridden
    common.add_argument("--config", type=Path, help="YAML config file; flags win over it")
    common.add_argument("--manifest", type=Path, help="corpus manifest (YAML)")
    common.add_argument("--schema", type=Path, help="indicator schema (YAML); default: shipped PMC schema")
    common.add_argument("--dict", dest="dictionary", type=Path, help="dictionary, one term per line")
    common.add_argument("--stopwords", type=Path, help="stopword list, one term per line")
    common.add_argument("--scorecards", type=Path, help="manual scorecards CSV (doc_id,subvar_id,value,source)")
    common.add_argument("--overrides", type=Path, help="manual override CSV applied on top of scorecards")
    common.add_argument("--window", type=int, help="TextRank co-occurrence window (default 5)")
    common.add_argument("--damping", type=float, help="TextRank damping factor (default 0.85)")
    common.add_argument("--tol", type=float, help="TextRank L1 convergence tolerance (default 1e-6)")
    common.add_argument("--max-iter", dest="max_iter", type=int, help="TextRank iteration cap (default 100)")
    common.add_argument("--top", type=int, help="number of fused keywords kept (default 20)")
    common.add_argument("--k-clusters", dest="k_clusters", type=int, help="keyword clusters (default 5)")
    common.add_argument("--out", type=Path, help="output directory (default ./out)")
    common.add_argument("--format", dest="formats", help="comma-separated subset of csv,markdown,svg")
    common.add_argument("--method", choices=METHODS, help="keyword tables to produce (default all)")
    common.add_argument("--textrank-scope", dest="textrank_scope", choices=TEXTRANK_SCOPES,
                        help="TextRank table per document or summed over the corpus")
    common.add_argument("--workers", type=int, help="worker threads (default: physical cores)")
    common.add_argument("--log-level", dest="log_level", help="logging level (default INFO)")
    common.add_argument("--log-file", dest="log_file", type=Path, help="also log to this file")

    parser = argparse.ArgumentParser(prog="pmc-pipeline", description="Policy text mining and PMC index pipeline")
    subparsers = parser.add_subparsers(dest="command", required=True)
    helps = {
        "ingest": "validate and load the corpus",
        "keywords": "frequency, TF-IDF, TextRank and fused keyword tables",
        "coword": "keyword co-occurrence matrix and edge list",
        "cluster": "hierarchical clustering of the keywords",
        "suggest": "rule-based scorecard suggestions",
        "score": "PMC index, G, levels, statistics and charts",
        "report": "re-render tables and charts from results.csv",
        "run": "ingest, keywords, cluster and score in one go",
    }
    for name, text in helps.items():
        subparsers.add_parser(name, parents=[common], help=text)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    config_file = args.pop("config")

    try:
        config = build_config(args, config_file)
        configure_logging(config.log_level, config.log_file)
        logger.info("Running %s", command)
        return COMMANDS[command](config)
    except PipelineError as e:
        logger.error("%s failed: %s", command, e)
        print(f"❌ {e}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.critical("Unexpected error in %s: %s", command, e, exc_info=True)
        print(f"🔥 {command} crashed: {e}", file=sys.stderr)
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    sys.exit(main())
