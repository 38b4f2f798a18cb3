"""
ethlab - диагностика термализации собственных состояний
Точка входа приложения
"""
import sys

from ethlab.app.cli import main


if __name__ == "__main__":
    sys.exit(main())
