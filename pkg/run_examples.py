#!/usr/bin/env python
"""
Run the bundled example configurations.
For each config in configs/:
1. Verifies periodicity in shifts
2. Runs the full analysis (report + CSV tracks under out/)
"""
import sys
from pathlib import Path

from dotenv import load_dotenv

from shift_floquet.cli import execute_from_command_line

load_dotenv()

BASE_DIR = Path(__file__).resolve().parent
CONFIG_DIR = BASE_DIR / 'configs'

# Configs that are expected to fail verification (exit code 2).
EXPECTED_EXIT = {'nonperiodic.json': 2}


def print_step(step_num, message):
    """Print formatted step message."""
    print(f"\n{'='*60}")
    print(f"Step {step_num}: {message}")
    print('='*60)


def run_config(path: Path) -> bool:
    expected = EXPECTED_EXIT.get(path.name, 0)
    code = execute_from_command_line(['shift_floquet', 'verify', '--config', str(path)])
    if code == 0:
        code = execute_from_command_line(['shift_floquet', 'analyze', '--config', str(path)])
    if code == expected:
        print(f"✓ {path.name}: exit code {code}")
        return True
    print(f"✗ {path.name}: exit code {code}, expected {expected}")
    return False


def main():
    configs = sorted(CONFIG_DIR.glob('*.json'))
    if not configs:
        print(f"✗ No configs found in {CONFIG_DIR}")
        sys.exit(1)

    failures = []
    for step, path in enumerate(configs, start=1):
        print_step(step, f"Analyzing {path.name}")
        if not run_config(path):
            failures.append(path.name)

    print(f"\n{'='*60}")
    if failures:
        print(f"✗ {len(failures)} example(s) did not behave as expected: {', '.join(failures)}")
        sys.exit(1)
    print(f"✅ All {len(configs)} examples behaved as expected")


if __name__ == '__main__':
    main()
