"""Пакет services - вспомогательные сервисы."""
