import sys

from dotenv import load_dotenv

from utils.threads import pin_blas_threads

# Before numpy is imported anywhere: timings assume single-threaded BLAS
pin_blas_threads(1)
load_dotenv()

from cli_reporting.cli import run_cli  # noqa: E402


def main() -> int:
    return run_cli(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
