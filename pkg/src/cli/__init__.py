from src.cli.main import build_parser, run
from src.cli.output import RunWriter, load_manifest, verify_manifest
from src.cli.verify import CheckResult, run_verify

__all__ = ["CheckResult", "RunWriter", "build_parser", "load_manifest", "run", "run_verify", "verify_manifest"]
