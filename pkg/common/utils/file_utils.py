"""File utilities following DRY principle."""

import csv
import json
import os
from typing import Any, Iterable, List, Sequence


class FileUtils:
    """Common file operations."""

    @staticmethod
    def read_json_file(file_path: str) -> Any:
        """
        Read a JSON document.

        Args:
            file_path: Path to JSON file

        Returns:
            Parsed JSON data

        Raises:
            IOError: If the file cannot be read
            ValueError: If the content is not valid JSON
        """
        with open(file_path, "r", encoding="utf-8") as f:
            content = f.read()
        try:
            return json.loads(content)
        except json.JSONDecodeError as e:
            raise ValueError(
                f"{file_path}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}"
            ) from e

    @staticmethod
    def write_json_file(file_path: str, data: Any, indent: int = 2):
        """
        Write data to JSON file.

        Keys are sorted so that identical data gives byte-identical files.

        Args:
            file_path: Path to JSON file
            data: Data to write
            indent: JSON indentation level
        """
        with open(file_path, "w", encoding="utf-8") as f:
            json.dump(data, f, ensure_ascii=False, indent=indent, sort_keys=True)
            f.write("\n")

    @staticmethod
    def write_csv_file(file_path: str, header: Sequence[str], rows: Iterable[Sequence[Any]]):
        """
        Write rows to a CSV file.

        Args:
            file_path: Path to CSV file
            header: Column names
            rows: Row values
        """
        with open(file_path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([FileUtils.format_cell(value) for value in row])

    @staticmethod
    def read_csv_file(file_path: str) -> List[List[str]]:
        """
        Read a CSV file, header included.

        Args:
            file_path: Path to CSV file

        Returns:
            List of rows (each a list of strings)
        """
        with open(file_path, "r", encoding="utf-8", newline="") as f:
            return [row for row in csv.reader(f)]

    @staticmethod
    def format_cell(value: Any) -> str:
        """Shortest round-trip representation for floats."""
        if isinstance(value, float):
            return repr(value)
        return str(value)

    @staticmethod
    def ensure_directory_exists(directory: str):
        """
        Ensure directory exists, create if it doesn't.

        Args:
            directory: Directory path
        """
        os.makedirs(directory, exist_ok=True)
