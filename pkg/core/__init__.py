"""Пакет core - бизнес-логика приложения."""
