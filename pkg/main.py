import sys
from cli import run_cli

def main():
    sys.exit(run_cli(sys.argv[1:]))

if __name__ == "__main__":
    main()
