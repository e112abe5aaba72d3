# package marker; .env is loaded before any submodule reads ARTIFACT_DIR / DATA_DIR
from dotenv import load_dotenv

load_dotenv()
