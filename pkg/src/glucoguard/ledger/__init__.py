"""Sub-package with the hash-chained block store, Merkle trees and miner approvals."""
from glucoguard.ledger.chain import Ledger, TransactionPool  # noqa
from glucoguard.ledger.data import Block, BlockHeader, MinerApproval  # noqa
from glucoguard.ledger.data import TransactionKind, TransactionRecord  # noqa
from glucoguard.ledger.validate import validate_chain  # noqa

__author__ = "glucoguard"
