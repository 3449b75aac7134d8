import os
import tempfile
import unittest

from glucoguard.common.integrity import hexlify
from glucoguard.ledger.store import (
    StoreFormatError,
    block_to_dict,
    deserialize_block,
    read_store,
    serialize_block,
    write_store,
)
from glucoguard.ledger.tests.common import Test_Ledger


class Test_BlockSerialization(Test_Ledger):
    def test_round_trip(self):
        ledger = self._build_chain(5)
        for block in ledger.blocks:
            data = serialize_block(block)
            copy = deserialize_block(data)
            self.assertEqual(copy, block)
            self.assertEqual(copy.block_hash, block.block_hash)

    def test_layout(self):
        block = self._build_chain(1).blocks[0]
        data = serialize_block(block)
        self.assertEqual(data[:172], block.header.to_bytes())
        self.assertEqual(int.from_bytes(data[172:176], "big"), len(block.transactions))
        # approvals are the last 64 bytes each
        self.assertEqual(data[-64:], block.approvals[-1].to_bytes())

    def test_malformed(self):
        data = serialize_block(self._build_chain(1).blocks[0])
        with self.assertRaises(StoreFormatError):
            deserialize_block(data[:-1])
        with self.assertRaises(StoreFormatError):
            deserialize_block(data + b"\x00")
        with self.assertRaises(StoreFormatError):
            deserialize_block(data[:100])

    def test_block_to_dict(self):
        block = self._build_chain(1).blocks[0]
        res = block_to_dict(block)
        self.assertEqual(res["index"], 0)
        self.assertEqual(res["block_hash"], hexlify(block.block_hash))
        self.assertEqual(res["prev_hash"], "00" * 32)
        self.assertEqual(len(res["transactions"]), len(block.transactions))
        self.assertEqual(res["approvals"][0]["miner_id"], hexlify(self.patient))


class Test_BlockFile(Test_Ledger):
    def setUp(self):
        super().setUp()
        self.tmpdir = tempfile.TemporaryDirectory()
        self.path = os.path.join(self.tmpdir.name, "chain.blocks")

    def tearDown(self):
        self.tmpdir.cleanup()

    def test_write_read(self):
        ledger = self._build_chain(4)
        write_store(self.path, ledger.blocks)
        self.assertEqual(read_store(self.path), list(ledger.blocks))

    def test_truncated_file(self):
        write_store(self.path, self._build_chain(2).blocks)
        with open(self.path, "rb") as fd:
            data = fd.read()
        with open(self.path, "wb") as fd:
            fd.write(data[:-10])
        with self.assertRaises(StoreFormatError):
            read_store(self.path)
        with open(self.path, "wb") as fd:
            fd.write(b"\x00\x00")
        with self.assertRaises(StoreFormatError):
            read_store(self.path)

    def test_ledger_persists_appends(self):
        ledger = self._ledger(store=self.path)
        self._append(ledger, [self._tx(payload=b"one")])
        self._append(ledger, [self._tx(payload=b"two")])
        reloaded = self._ledger(store=self.path)
        self.assertEqual(list(reloaded.blocks), list(ledger.blocks))
        self.assertEqual(reloaded.hash_table_size, 2)
        self.assertIsNone(reloaded.validate())
        # appending continues the chain
        self._append(reloaded, [self._tx(payload=b"three")])
        self.assertEqual(reloaded.get_block(2).header.prev_hash, ledger.blocks[1].block_hash)
        self.assertEqual(len(read_store(self.path)), 3)


if __name__ == "__main__":
    unittest.main()
