"""
Setup script for the robust MDP qualitative solver
"""

import sys
from pathlib import Path


def create_directories():
    """Create necessary directories"""
    directories = ['logs', 'models']

    for directory in directories:
        Path(directory).mkdir(exist_ok=True)
        print(f"✓ Created directory: {directory}")


def check_dependencies():
    """Check if required dependencies are installed"""
    required_packages = {
        'pandas': 'pandas',
        'numpy': 'numpy',
        'pyyaml': 'yaml',
        'python-dotenv': 'dotenv',
        'rich': 'rich',
    }

    missing_packages = []

    for package, module in required_packages.items():
        try:
            __import__(module)
        except ImportError:
            missing_packages.append(package)

    if missing_packages:
        print(f"⚠ Missing packages: {', '.join(missing_packages)}")
        print("Run: pip install -r requirements.txt")
        return False
    else:
        print("✓ All required packages are installed")
        return True


def validate_config():
    """Validate configuration file"""
    config_path = Path('config.yaml')

    if not config_path.exists():
        print("- config.yaml not found, built-in defaults will be used")
        return True

    try:
        import yaml
        with open(config_path, 'r') as f:
            config = yaml.safe_load(f) or {}

        known_sections = ['solver', 'batch', 'generator', 'logging']
        unknown_sections = [section for section in config if section not in known_sections]
        if unknown_sections:
            print(f"⚠ Unknown config sections: {', '.join(unknown_sections)}")
            return False

        arith = config.get('solver', {}).get('arith', 'exact')
        if arith not in ('exact', 'float'):
            print(f"⚠ solver.arith must be exact or float, got '{arith}'")
            return False

        print("✓ Configuration file is valid")
        return True

    except Exception as e:
        print(f"⚠ Error validating config: {e}")
        return False


def main():
    """Main setup function"""
    print("Robust MDP Qualitative Solver Setup")
    print("=" * 40)

    print("\n1. Creating directories...")
    create_directories()

    print("\n2. Checking dependencies...")
    deps_ok = check_dependencies()

    print("\n3. Validating configuration...")
    config_ok = validate_config()

    print("\n" + "=" * 40)
    print("Setup Summary:")

    if deps_ok and config_ok:
        print("✓ Setup completed successfully!")
        print("\nNext steps:")
        print("1. Generate a model: python main.py gen fig1 -o models/fig1.json")
        print("2. Solve it: python main.py solve --model models/fig1.json --objective reach:target")
        print("3. Run the tests: pytest -m 'not slow'")
    else:
        print("⚠ Setup completed with warnings. Please address the issues above.")

        if not deps_ok:
            print("\n→ Install dependencies: pip install -r requirements.txt")
        if not config_ok:
            print("→ Fix configuration issues in config.yaml")

    print("\nFor detailed instructions, see README.md")
    return 0 if deps_ok and config_ok else 1


if __name__ == "__main__":
    sys.exit(main())
