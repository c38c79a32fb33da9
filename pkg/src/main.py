import argparse
import asyncio
import json
import logging
import os
import sys
import pathlib
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

# Thêm thư mục gốc vào sys.path
root_dir = str(pathlib.Path(__file__).parent.parent.absolute())
if root_dir not in sys.path:
    sys.path.append(root_dir)

from src.models import RunSpec
from src.errors import ToolkitError
from src.pipeline import pipeline
from config.settings import settings

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_SPEC = 2

REPORT_COMMANDS = {"locality verify", "verify-cert"}


def setup_logging() -> None:
    """Log ra stderr (và logs/app.log); stdout chỉ dành cho JSON kết quả"""
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if settings.log_to_file:
        os.makedirs(settings.logs_path, exist_ok=True)
        handlers.append(logging.FileHandler(os.path.join(settings.logs_path, 'app.log'), encoding='utf-8'))
    logging.basicConfig(
        level=getattr(logging, settings.log_level.upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
    )


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--in", dest="input_path", help="JSON LocalitySpec hoặc GroupSpec")
    common.add_argument("--group", help="Tên nhóm trong thư viện (S3, S4, D8, D12, A4, SL23, C_n)")
    common.add_argument("--out", dest="output_path", help="Ghi JSON ra file thay vì stdout")
    common.add_argument("--delta", help="all, nontrivial hoặc JSON {\"overgroups_of\": ...} / {\"explicit\": ...}")
    common.add_argument("--p", type=int)
    common.add_argument("--degree", type=int, default=1)
    common.add_argument("--maxlen", type=int)

    parser = argparse.ArgumentParser(prog="locality", description="Locality Fusion Toolkit")
    commands = parser.add_subparsers(dest="command", required=True)

    group = commands.add_parser("group", help="Thông tin nhóm").add_subparsers(dest="action", required=True)
    group.add_parser("info", parents=[common])

    locality = commands.add_parser("locality", help="Dựng hoặc kiểm tra locality").add_subparsers(dest="action", required=True)
    locality.add_parser("build", parents=[common])
    locality.add_parser("verify", parents=[common])

    commands.add_parser("essentials", parents=[common], help="Các nhóm con essential")

    dec = commands.add_parser("decompose", parents=[common], help="Chứng chỉ phân tích essential")
    dec.add_argument("--element", required=True, help="Phần tử dạng chu trình, ví dụ \"(1 2 3)\"")

    cert = commands.add_parser("verify-cert", parents=[common], help="Kiểm tra lại chứng chỉ")
    cert.add_argument("--cert", dest="cert_path", required=True)

    transporter = commands.add_parser("transporter", help="Transporter category").add_subparsers(dest="action", required=True)
    info = transporter.add_parser("info", parents=[common])
    info.add_argument("--essential-only", action="store_true")

    limit = commands.add_parser("limit", parents=[common], help="Giới hạn ngược của một hàm tử")
    limit.add_argument("--functor", default="h1", help="fixed-points, h0, h1, h2 hoặc đường dẫn FunctorSpec JSON")
    limit.add_argument("--module", default="trivial", help="trivial, permutation hoặc đường dẫn ModuleSpec JSON")
    limit.add_argument("--essential-only", action="store_true")

    coh = commands.add_parser("cohomology", parents=[common], help="So sánh Cartan-Eilenberg")
    coh.add_argument("--module", default="trivial")
    return parser


def to_run_spec(args: argparse.Namespace) -> RunSpec:
    command = f"{args.command} {args.action}" if getattr(args, "action", None) else args.command
    fields = {k: v for k, v in vars(args).items() if k not in ("command", "action") and v is not None}
    return RunSpec(command=command, **fields)


def emit(payload: Any, output_path: Optional[str]) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    if output_path:
        with open(output_path, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def fail(payload: Dict[str, Any], exit_code: int) -> int:
    sys.stderr.write(json.dumps(payload, ensure_ascii=False) + "\n")
    return exit_code


def main(argv: Optional[List[str]] = None) -> int:
    """Chạy một lệnh; trả mã thoát 0/1/2/3/4"""
    args = build_parser().parse_args(argv)
    try:
        spec = to_run_spec(args)
        payload = asyncio.run(pipeline.run(spec))
    except ValidationError as e:
        return fail({"error": "spec", "detail": str(e)}, EXIT_SPEC)
    except ToolkitError as e:
        return fail(e.to_payload(), e.exit_code)
    except Exception as e:
        logger.error(f"Lỗi không mong đợi: {e}", exc_info=True)
        return fail({"error": "internal", "detail": str(e)}, EXIT_INTERNAL)

    emit(payload, spec.output_path)
    if spec.command in REPORT_COMMANDS and not payload["passed"]:
        first = payload["violations"][0] if payload.get("violations") else {}
        return fail({"error": "report_failed", "detail": first}, EXIT_INTERNAL)
    return EXIT_OK


if __name__ == "__main__":
    setup_logging()
    sys.exit(main())
