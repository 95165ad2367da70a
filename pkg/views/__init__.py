from views.cli import run, main, build_parser

__all__ = ['run', 'main', 'build_parser']
