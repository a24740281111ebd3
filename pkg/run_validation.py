#!/usr/bin/env python3
"""
Simple validation runner that ensures we're in the right directory
"""
import os
import sys
import subprocess
from pathlib import Path

SUITES = [
    ("Numerics", "tests/test_numerics.py"),
    ("Quantized Source", "tests/test_quantized_source.py"),
    ("Asymptotic Security", "tests/test_asymptotic_security.py"),
    ("Finite Size", "tests/test_finite_size.py"),
    ("Monte Carlo", "tests/test_monte_carlo.py"),
    ("CLI", "tests/test_cli.py"),
    ("API", "tests/test_api.py"),
]

def run_step(label, command):
    """Run one subprocess step and report whether it succeeded"""
    try:
        result = subprocess.run(command, capture_output=True, text=True)

        print(result.stdout)
        if result.stderr:
            print(f"Stderr: {result.stderr}")

        return result.returncode == 0

    except Exception as e:
        print(f"❌ Error running {label}: {e}")
        return False

def main():
    # Make sure we're in the project root
    project_root = Path(__file__).parent
    os.chdir(project_root)

    print("🚀 Running QRNG Finite-Size Validation Suite")
    print("=" * 50)

    results = []

    print("\n1. Running Acceptance Checks...")
    results.append(("Acceptance Checks", run_step("acceptance checks", [
        sys.executable, "scripts/check_acceptance.py"
    ])))

    for number, (label, path) in enumerate(SUITES, start=2):
        print(f"\n{number}. Running {label} Tests...")
        results.append((f"{label} Tests", run_step(f"{label} tests", [
            sys.executable, "-m", "pytest", path, "-v"
        ])))

    # Summary
    print("\n📊 Validation Summary:")
    for label, success in results:
        print(f"   {label}: {'✅ PASS' if success else '❌ FAIL'}")

    if all(success for _, success in results):
        print("\n🎉 All validations passed!")
        return 0
    else:
        print("\n💥 Some validations failed!")
        return 1

if __name__ == "__main__":
    sys.exit(main())
