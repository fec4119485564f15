#!/usr/bin/env python3
"""
Script to generate the synthetic fixtures for SigScale.
"""
import sys
import os
import json

# Add the project root to the Python path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from data.synthetic.generator import SyntheticDataGenerator
from config.settings import settings
from loguru import logger


def main():
    """Main function to generate synthetic fixtures."""
    logger.info("Starting synthetic data generation...")

    generator = SyntheticDataGenerator(seed=settings.seed)
    data = generator.generate_all_data()
    paths = generator.save_data(data)

    summary = {
        "seed": generator.seed,
        "fixtures": {
            name: {
                "path": paths[name],
                "rows": int(getattr(item, "n_requests", len(item) if hasattr(item, "__len__") else 0)),
            }
            for name, item in data.items()
            if name in paths
        },
    }
    summary_path = os.path.join(generator.output_dir, "generation_summary.json")
    with open(summary_path, "w") as f:
        json.dump(summary, f, indent=2)

    logger.info(f"Summary saved to {summary_path}")


if __name__ == "__main__":
    main()
