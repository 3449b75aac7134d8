"""
Versioned binary model file.

  magic 'GGRF' | u16 version | config | u32 n_samples | u64 trained_at
  | u16 length + comma separated feature names | u32 tree count
  | per tree: u32 node count + node records

All integers and floats are big-endian. Node records are (i8 feature, f64 threshold,
i32 left, i32 right, f64 value), a leaf has feature -1.
"""
from __future__ import annotations

import logging
import struct
from typing import List, Tuple

import numpy as np

from glucoguard.common.integrity import checksum_bytes2str
from glucoguard.detector.data import ForestConfig, ModelFormatError
from glucoguard.detector.forest import RandomForest
from glucoguard.detector.tree import DecisionTree

__author__ = "glucoguard"

logger = logging.getLogger(__name__)

MAGIC = b"GGRF"
FORMAT_VERSION = 1

_PREAMBLE = struct.Struct(">4sH")
# n_trees, max_depth, seed, features_per_split, bootstrap, min_samples_leaf, min_samples_split
_CONFIG = struct.Struct(">IIQBBII")
_META = struct.Struct(">IQ")
_U16 = struct.Struct(">H")
_U32 = struct.Struct(">I")

NODE_DTYPE = np.dtype(
    [("feature", ">i1"), ("threshold", ">f8"), ("left", ">i4"), ("right", ">i4"), ("value", ">f8")]
)


def _tree_to_bytes(tree: DecisionTree) -> bytes:
    nodes = np.empty(len(tree), dtype=NODE_DTYPE)
    for name in NODE_DTYPE.names:
        nodes[name] = getattr(tree, name)
    return _U32.pack(len(tree)) + nodes.tobytes()


def _tree_from_bytes(data: bytes, offset: int, max_depth: int) -> Tuple[DecisionTree, int]:
    (count,) = _U32.unpack_from(data, offset)
    offset += _U32.size
    end = offset + count * NODE_DTYPE.itemsize
    if count == 0 or end > len(data):
        raise ModelFormatError(f"Truncated tree at offset {offset}")
    nodes = np.frombuffer(data[offset:end], dtype=NODE_DTYPE)
    links = np.concatenate([nodes["left"], nodes["right"]])
    if links.min() < -1 or links.max() >= count:
        raise ModelFormatError("Tree node links out of range")
    tree = DecisionTree(
        feature=nodes["feature"].astype(np.int64),
        threshold=nodes["threshold"].astype(np.float64),
        left=nodes["left"].astype(np.int64),
        right=nodes["right"].astype(np.int64),
        value=nodes["value"].astype(np.float64),
        max_depth=max_depth,
    )
    return tree, end


def model_to_bytes(model: RandomForest) -> bytes:
    config = model.config
    names = ",".join(model.feature_names).encode()
    res = [
        _PREAMBLE.pack(MAGIC, FORMAT_VERSION),
        _CONFIG.pack(
            config.n_trees,
            config.max_depth,
            config.seed,
            config.features_per_split,
            int(config.bootstrap),
            config.min_samples_leaf,
            config.min_samples_split,
        ),
        _META.pack(model.n_samples, model.trained_at),
        _U16.pack(len(names)),
        names,
        _U32.pack(len(model.trees)),
    ]
    res += [_tree_to_bytes(tree) for tree in model.trees]
    return b"".join(res)


def model_from_bytes(data: bytes) -> RandomForest:
    """Parse a model, raising ModelFormatError on anything unexpected."""
    try:
        magic, version = _PREAMBLE.unpack_from(data, 0)
        if magic != MAGIC:
            raise ModelFormatError(f"Bad magic {magic!r}, not a model file")
        if version != FORMAT_VERSION:
            raise ModelFormatError(f"Unsupported model format version {version}")
        offset = _PREAMBLE.size
        fields = _CONFIG.unpack_from(data, offset)
        offset += _CONFIG.size
        config = ForestConfig(
            n_trees=fields[0],
            max_depth=fields[1],
            seed=fields[2],
            features_per_split=fields[3],
            bootstrap=bool(fields[4]),
            min_samples_leaf=fields[5],
            min_samples_split=fields[6],
        )
        n_samples, trained_at = _META.unpack_from(data, offset)
        offset += _META.size
        (names_len,) = _U16.unpack_from(data, offset)
        offset += _U16.size
        names = tuple(data[offset : offset + names_len].decode().split(","))
        offset += names_len
        (tree_count,) = _U32.unpack_from(data, offset)
        offset += _U32.size
        trees: List[DecisionTree] = []
        for _ in range(tree_count):
            tree, offset = _tree_from_bytes(data, offset, config.max_depth)
            trees.append(tree)
    except (struct.error, UnicodeDecodeError) as exc:
        raise ModelFormatError(f"Malformed model: {exc}") from exc
    if offset != len(data):
        raise ModelFormatError(f"{len(data) - offset} trailing bytes in model")
    if tree_count != config.n_trees:
        raise ModelFormatError(f"Model holds {tree_count} trees, config says {config.n_trees}")
    return RandomForest(
        trees=tuple(trees),
        config=config,
        n_samples=n_samples,
        trained_at=trained_at,
        feature_names=names,
    )


def save_model(model: RandomForest, path: str) -> None:
    data = model_to_bytes(model)
    with open(path, "wb") as fd:
        fd.write(data)
    logger.info(f"Wrote model ({len(model)} trees) to file {path} {checksum_bytes2str(data)}")


def load_model(path: str) -> RandomForest:
    with open(path, "rb") as fd:
        data = fd.read()
    model = model_from_bytes(data)
    logger.info(f"Loaded model ({len(model)} trees) from file {path} {checksum_bytes2str(data)}")
    return model
