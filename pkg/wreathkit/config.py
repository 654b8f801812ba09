from pathlib import Path
from typing import Optional

from dotenv import load_dotenv
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

# Подгружаем переменные из .env до создания Settings
_ENV_PATH = Path(__file__).resolve().parent.parent / ".env"
load_dotenv(_ENV_PATH)


class Settings(BaseSettings):
    """
    Загружает настройки инструментария из переменных окружения.

    :ivar search_budget: Максимальное число узлов, которое хранит любой ограниченный перебор.
    :ivar factor_cap: Максимальное число множителей в взвешенном переборе (ограничивает слой веса 0).
    :ivar log_level: Уровень логирования.
    :ivar report_dir_raw: Каталог для отчётов с относительным путём (если задан).
    :ivar cache_cap: Наибольшее число записей в таблице интернирования и в кэше произведений.
    """
    search_budget: int = Field(default=10_000_000, alias="WREATHKIT_BUDGET", ge=1)
    factor_cap: int = Field(default=6, alias="WREATHKIT_FACTOR_CAP", ge=0)
    log_level: str = Field(default="INFO", alias="WREATHKIT_LOG_LEVEL")
    report_dir_raw: Optional[str] = Field(default=None, alias="WREATHKIT_REPORT_DIR")
    cache_cap: int = Field(default=2_000_000, alias="WREATHKIT_CACHE_CAP", ge=1)

    model_config = SettingsConfigDict(env_file=".env", case_sensitive=True, extra="ignore")

    @property
    def report_dir(self) -> Path | None:
        """Возвращает каталог отчётов из строки окружения."""

        if not self.report_dir_raw or not self.report_dir_raw.strip():
            return None
        return Path(self.report_dir_raw.strip())


settings = Settings()
