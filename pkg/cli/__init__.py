"""Пакет cli - разбор командной строки."""
