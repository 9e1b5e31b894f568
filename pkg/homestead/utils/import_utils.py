import importlib


def import_attribute(arg: str):
    module_name, attribute_name = arg.rsplit('.', 1)
    module = importlib.import_module(module_name)
    return getattr(module, attribute_name)


def import_registry(registry: dict):
    """Resolve a {name: dotted.path} mapping into {name: attribute}, preserving order"""
    return {name: import_attribute(path) for name, path in registry.items()}
