#!/usr/bin/env python3
"""
Locality Fusion Toolkit

Script chạy CLI: kiểm tra thư viện phụ thuộc rồi chuyển tham số cho src.main
"""

import sys
from pathlib import Path


def check_requirements():
    """Kiểm tra requirements.txt"""
    try:
        import numpy
        import sympy
        import networkx
        import pydantic_settings
        import slugify
        return True
    except ImportError as e:
        print(f"❌ Thiếu dependency: {e}", file=sys.stderr)
        print("Chạy: pip install -r requirements.txt", file=sys.stderr)
        return False


def check_directories():
    """Tạo thư mục log"""
    Path("logs").mkdir(parents=True, exist_ok=True)


def main():
    """Hàm chính"""
    if not check_requirements():
        sys.exit(1)

    check_directories()

    from src.main import main as cli_main, setup_logging

    setup_logging()
    try:
        sys.exit(cli_main(sys.argv[1:]))
    except KeyboardInterrupt:
        print("\n👋 Đã dừng", file=sys.stderr)
        sys.exit(130)


if __name__ == "__main__":
    main()
