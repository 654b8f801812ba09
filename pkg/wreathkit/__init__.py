"""Инструментарий для автоматных групп: рекурсия сплетения, материнские группы, вложения."""

__version__ = "0.1.0"
