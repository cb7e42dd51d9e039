#!/usr/bin/env python3
"""Run the Iris SVM case study with default settings.

Usage: python3 scripts/run_iris.py [output_dir]
"""

import sys

from xaiq import PipelineConfig, run_iris_pipeline


def main() -> int:
    output_dir = sys.argv[1] if len(sys.argv) > 1 else "xaiq_out/iris"
    bundle = run_iris_pipeline(PipelineConfig(output_dir=output_dir))
    summary = bundle.summary
    print(f"report bundle: {bundle.output_dir}")
    print(f"training accuracy: {summary['training_accuracy']:.4f}")
    print(f"rules: {summary['rules']['count']} (mean omega {summary['rules']['complexity_mean']})")
    print(f"keep-absolute AUC: {summary['keep_absolute']['auc']:.4f}")
    for family, bounds in summary["total_explainability"].items():
        print(f"total explainability [{family}]: {bounds['min']:.4f} .. {bounds['max']:.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
