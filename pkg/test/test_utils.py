import json
import logging
import os
from typing import Generator


def get_resource(file_name: str) -> str:
    return os.path.join(os.path.dirname(os.path.abspath(__file__)), "resources", file_name)


def get_tests(file_name: str) -> Generator[dict, None, None]:
    with open(get_resource(file_name)) as f:
        for line in f:
            if not line.strip():
                continue
            try:
                yield json.loads(line)
            except Exception:
                logging.error(f"Error parsing test: {line}")
                raise


def get_test_ids(file_name: str):
    return [test["name"] for test in get_tests(file_name)]
