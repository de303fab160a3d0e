from src.cli.main import build_parser, main, parse_n_range

__all__ = ["build_parser", "main", "parse_n_range"]
