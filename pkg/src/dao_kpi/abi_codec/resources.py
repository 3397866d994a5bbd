"""Built-in ABI documents and event mappings shipped with the package, or user files in their place."""
from importlib import resources
from pathlib import Path
from typing import List

from dao_kpi.abi_codec.abi import AbiEventSpec, parse_abi
from dao_kpi.abi_codec.governance import EventMapping
from dao_kpi.errors import ConfigError


BUILTIN_ABIS = ('erc20', 'governor_alpha', 'governor_bravo', 'oz_governor')
BUILTIN_MAPPINGS = ('governor_alpha', 'governor_bravo', 'oz_governor')


def _read(ref: str, folder: str, builtins, base_dir: Path = None) -> str:
    if ref in builtins:
        return resources.files('dao_kpi.abi_codec').joinpath(folder, f'{ref}.json').read_text()
    path = Path(ref)
    if not path.is_absolute() and base_dir is not None:
        path = Path(base_dir) / path
    if not path.is_file():
        raise ConfigError(f'Cannot resolve {folder[:-1]} reference "{ref}": not built in ({", ".join(builtins)}) '
                          f'and no file at {path}')
    return path.read_text()


def load_abi(ref: str, base_dir: Path = None, on_unsupported: str = 'skip') -> List[AbiEventSpec]:
    return parse_abi(_read(ref, 'abis', BUILTIN_ABIS, base_dir), on_unsupported=on_unsupported)


def load_mapping(ref: str, base_dir: Path = None) -> EventMapping:
    return EventMapping.from_json(_read(ref, 'mappings', BUILTIN_MAPPINGS, base_dir))
