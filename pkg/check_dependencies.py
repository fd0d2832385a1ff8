#!/usr/bin/env python3
"""
Скрипт проверки всех зависимостей requirements.txt
"""

import sys

# Список критичных пакетов для проверки
CRITICAL_PACKAGES = [
    ('numpy', 'numpy'),
    ('scipy', 'scipy'),
    ('dotenv', 'python-dotenv'),
]

# Нужны только для запуска тестов
DEV_PACKAGES = [
    ('pytest', 'pytest'),
]


def check_packages(packages=CRITICAL_PACKAGES):
    """Проверить установку пакетов; вернуть список отсутствующих."""
    missing = []
    for import_name, package_name in packages:
        try:
            __import__(import_name)
            print(f"✅ {package_name}")
        except ImportError:
            missing.append(package_name)
            print(f"❌ {package_name}")
    return missing


def main():
    print("🔍 Проверка зависимостей...\n")
    missing = check_packages(CRITICAL_PACKAGES)
    dev_missing = check_packages(DEV_PACKAGES)

    total = len(CRITICAL_PACKAGES) + len(DEV_PACKAGES)
    print(f"\n{'='*50}")
    print(f"Установлено: {total - len(missing) - len(dev_missing)}/{total}")

    if dev_missing:
        print(f"\n⚠️  Для тестов не хватает: {', '.join(dev_missing)}")
    if missing:
        print(f"\n⚠️  Отсутствуют пакеты:")
        for pkg in missing:
            print(f"   - {pkg}")
        print(f"\nУстановите их командой:")
        print(f"pip install {' '.join(missing)}")
        return 1
    print("\n✅ Все критичные пакеты установлены!")
    return 0


if __name__ == '__main__':
    sys.exit(main())
