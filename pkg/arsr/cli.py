"""
arsr 命令行

子命令：upscale、collapse、quantize、train-toy、eval、dataset-prep、info

退出码：0 成功，1 用法错误，2 I/O 错误，3 格式错误，4 契约错误
"""

import argparse
import logging
import math
import sys

from arsr.exceptions import ExitCode, ValidationException, handle_exception, trace
from arsr.formats.image import COLOR_MATRICES
from arsr.metrics import METRICS
from arsr.pipeline.frame import CHROMA_METHODS
from arsr.pipeline.resample import METHODS

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class ArgumentParser(argparse.ArgumentParser):
    """用法错误以 ValidationException 抛出，统一映射为退出码 1"""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise ValidationException(message)


def _fmt_score(value: float) -> str:
    return "inf" if math.isinf(value) else f"{value:.6f}"


def _fmt_res(res) -> str:
    return f"{res[0]}x{res[1]}"


# ========== 子命令 ==========


def cmd_upscale(args) -> None:
    from arsr.resources import UpscaleResource

    result = UpscaleResource().request(
        {
            "input": args.input,
            "output": args.output,
            "weights": args.weights or [],
            "target_res": args.target_res,
            "chroma": args.chroma,
            "method": args.method,
            "matrix": args.matrix,
        }
    )
    stage = f"net x{result['net_factor']}" if result["net_factor"] > 1 else "net skipped"
    print(
        f"{result['output']}: {_fmt_res(result['input_res'])} -> {_fmt_res(result['output_res'])} "
        f"({args.method}, {stage}, lanczos {'yes' if result['lanczos'] else 'no'}, {result['frames']} frames)"
    )


def cmd_collapse(args) -> None:
    from arsr.resources import CollapseResource

    result = CollapseResource().request({"in_weights": args.in_weights, "out_weights": args.out_weights})
    print(f"{result['output']}: {result['params_before']:,} -> {result['params_after']:,} parameters")


def cmd_quantize(args) -> None:
    from arsr.resources import QuantizeResource

    result = QuantizeResource().request(
        {"weights": args.weights, "bits": args.bits, "pow2": args.pow2, "calib": args.calib, "out": args.out}
    )
    print(f"{result['output']}: {result['bits']}-bit, pow2={'yes' if result['pow2'] else 'no'}")
    for index, (ws, acts) in enumerate(zip(result["weight_scales"], result["activation_scales"])):
        print(f"  layer {index:2d}: weight scale {ws:.6g}, activation scale {acts:.6g}")


def cmd_train_toy(args) -> None:
    from arsr.resources import TrainToyResource

    result = TrainToyResource().request(
        {
            "data": args.data,
            "config": args.config,
            "loss": args.loss,
            "out_weights": args.out_weights,
            "history": args.history,
            "epochs": args.epochs,
            "seed": args.seed,
            "per_frame": args.per_frame,
        }
    )
    print(f"{result['output']}: {result['pairs']} pairs, {result['epochs']} epochs")
    if result["epochs"]:
        print(f"  loss {result['first_loss']:.6g} -> {result['final_loss']:.6g}")


def cmd_eval(args) -> None:
    from arsr.resources import EvalResource

    result = EvalResource().request({"ref": args.ref, "test": args.test, "metric": args.metric})
    for index, score in enumerate(result["scores"]):
        print(f"frame {index}: {result['metric']} {_fmt_score(score)}")
    print(f"mean: {result['metric']} {_fmt_score(result['mean'])}")
    if args.vmaf_hint:
        print("vmaf (external): " + " ".join(result["vmaf_command"]))


def cmd_dataset_prep(args) -> None:
    from arsr.resources import DatasetPrepResource

    result = DatasetPrepResource().request(
        {
            "src": args.src,
            "bitrate": args.bitrate,
            "scale_divisor": args.scale_divisor,
            "codec": args.codec,
            "source_res": args.source_res,
            "out_dir": args.out_dir,
            "vbr": args.vbr,
            "execute": args.execute,
        }
    )
    for line in result["commands"]:
        print(line)


def cmd_info(args) -> None:
    from arsr.resources import InfoResource

    result = InfoResource().request({"weights": args.weights})
    for key in sorted(result["manifest"]):
        if not key.startswith("layer."):
            print(f"{key}={result['manifest'][key]}")
    print(f"form: {result['form']}{' (quantized)' if result['quantized'] else ''}")
    print(f"parameters: {result['param_count']:,}")


# ========== 参数解析 ==========


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="arsr", description="ARSR super-resolution toolkit")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="warnings and errors only")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("upscale", help="upscale a PNG or Y4M to a target resolution")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--weights", action="append", help="collapsed weight file, repeat for several scales")
    p.add_argument("--target-res", required=True, help="WIDTHxHEIGHT")
    p.add_argument("--chroma", choices=CHROMA_METHODS)
    p.add_argument("--method", choices=("arsr", *METHODS), default="arsr")
    p.add_argument("--matrix", choices=tuple(COLOR_MATRICES))
    p.set_defaults(handler=cmd_upscale)

    p = sub.add_parser("collapse", help="fold expanded training weights into inference weights")
    p.add_argument("--in-weights", required=True)
    p.add_argument("--out-weights", required=True)
    p.set_defaults(handler=cmd_collapse)

    p = sub.add_parser("quantize", help="post-training quantization")
    p.add_argument("--weights", required=True)
    p.add_argument("--bits", type=int)
    p.add_argument("--pow2", action="store_true", default=None)
    p.add_argument("--calib", required=True, help="directory of calibration PNG/Y4M files")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_quantize)

    p = sub.add_parser("train-toy", help="overfit a small set of patch pairs")
    p.add_argument("--data", required=True, help="directory with lr/ and hr/ PNG subdirectories")
    p.add_argument("--config", help="JSON file with model/train/loss sections")
    p.add_argument("--loss", choices=("mae", "mse", "huber"))
    p.add_argument("--out-weights", required=True)
    p.add_argument("--history", help="CSV loss history output")
    p.add_argument("--epochs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--per-frame", type=int, default=1, help="patches cropped per frame pair")
    p.set_defaults(handler=cmd_train_toy)

    p = sub.add_parser("eval", help="per-frame quality scores")
    p.add_argument("--ref", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--metric", choices=METRICS, default="psnr")
    p.add_argument("--vmaf-hint", action="store_true", help="print the external VMAF invocation")
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("dataset-prep", help="encoder commands for LR/HR training pairs")
    p.add_argument("--src", required=True)
    p.add_argument("--bitrate", type=int, help="kbps")
    p.add_argument("--scale-divisor", type=int, default=4)
    p.add_argument("--codec")
    p.add_argument("--source-res", help="WIDTHxHEIGHT of the source")
    p.add_argument("--out-dir")
    p.add_argument("--vbr", action="store_true")
    p.add_argument("--execute", action="store_true", help="run the commands instead of printing")
    p.set_defaults(handler=cmd_dataset_prep)

    p = sub.add_parser("info", help="print a weight file manifest and parameter count")
    p.add_argument("--weights", required=True)
    p.set_defaults(handler=cmd_info)

    return parser


def configure_logging(verbose: bool = False, quiet: bool = False) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(format=LOG_FORMAT, stream=sys.stderr)
    logging.getLogger("arsr").setLevel(level)


def main(argv: list[str] | None = None) -> int:
    with trace() as trace_id:
        try:
            args = build_parser().parse_args(argv)
            configure_logging(args.verbose, args.quiet)
            logger.debug("arsr %s [trace_id=%s]", args.command, trace_id)
            args.handler(args)
        except Exception as exc:
            exit_code, error = handle_exception(exc)
            print(f"error: {error['message']}", file=sys.stderr)
            return exit_code
    return int(ExitCode.OK)


if __name__ == "__main__":
    sys.exit(main())
