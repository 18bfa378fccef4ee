from __future__ import annotations

import traceback


def main() -> int:
    try:
        from kisinweights.cli import run

        return run()
    except Exception:
        traceback.print_exc()
        print("提示：请先运行：python -m pip install -r requirements.txt")
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
