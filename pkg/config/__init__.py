"""Пакет config - настройки приложения."""
