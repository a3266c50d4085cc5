# main.py
import sys
import asyncio
import logging
import os
from typing import List, Optional

from dotenv import load_dotenv

from src.config import AppConfig
from src.commands import build_parser, config_from_args, dispatch
from src.errors import ExtremalZetaError


# ロギングの設定
def setup_logging(config: AppConfig, level: Optional[str] = None):
    os.makedirs(config.log_dir, exist_ok=True)

    logging.basicConfig(
        level=getattr(logging, (level or config.log_level).upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=[
            logging.FileHandler(f"{config.log_dir}/app.log"),
            # 標準出力はレポート用なのでログは標準エラーへ
            logging.StreamHandler(sys.stderr),
        ],
    )

    return logging.getLogger("extremal_zeta")


async def main(argv: Optional[List[str]] = None) -> int:
    # 環境変数の読み込み
    load_dotenv()
    config = AppConfig()

    args = build_parser().parse_args(argv)
    logger = setup_logging(config, args.log_level)
    logger.info(f"{args.command} を実行します")

    try:
        run = config_from_args(args, config)
    except ExtremalZetaError as e:
        logger.error(f"設定エラー: {e}", exc_info=True)
        return e.exit_code

    code = await dispatch(run, config)
    logger.info(f"{args.command} が終了しました (終了コード {code})")
    return code


if __name__ == "__main__":
    sys.exit(asyncio.run(main()))
