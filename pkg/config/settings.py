from pydantic_settings import BaseSettings, SettingsConfigDict
from pathlib import Path
from pydantic import Field


class Settings(BaseSettings):
    """
    Cấu hình của Locality Fusion Toolkit

    Mọi giới hạn "desk scale" đều đọc từ đây; biến môi trường dùng tiền tố LOCALITY_
    """

    # Giới hạn cho nhóm và dàn nhóm con
    max_group_order: int = Field(200, description="Cấp tối đa cho all_subgroups và kiểm tra tiên đề")
    max_sylow_order_for_hom: int = Field(64, description="|S| tối đa cho hom_F")

    # Cohomology
    max_cohomology_degree: int = 2
    max_cochain_coordinates: int = Field(20000, description="Giới hạn |G|^(n+1) * rank(M)")

    # Kiểm tra tiên đề locality
    verify_max_len: int = 4

    # Thư viện nhóm dựng sẵn
    library_config_file: str = "group_library.json"

    # Logging
    logs_path: str = "./logs"
    log_level: str = "INFO"
    log_to_file: bool = True

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="LOCALITY_",
        case_sensitive=False,
        extra="ignore",
    )

    def __init__(self, **kwargs):
        super().__init__(**kwargs)
        # Tạo thư mục log nếu cần
        if self.log_to_file:
            Path(self.logs_path).mkdir(parents=True, exist_ok=True)


# Global settings instance
settings = Settings()
