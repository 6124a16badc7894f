"""
HetNet Backhaul Optimizer - Entry Point

Joint cell association and wireless backhaul bandwidth allocation for a
two-tier HetNet with a massive-MIMO macro BS.
"""
import json
import sys


def main(argv=None) -> int:
    try:
        from app import HetNetExperimentApp
        return HetNetExperimentApp(argv).run()
    except KeyboardInterrupt:
        print("\n\nTerminated.", file=sys.stderr)
        return 130
    except Exception as e:
        print(json.dumps({'error': type(e).__name__, 'message': str(e)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
