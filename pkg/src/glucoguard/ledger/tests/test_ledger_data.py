import unittest
from dataclasses import replace

from glucoguard.common.integrity import hexlify, sha256
from glucoguard.ledger.data import (
    HEADER_SIZE,
    BlockHeader,
    MinerApproval,
    TransactionKind,
    TransactionRecord,
    approval_digest,
    compute_block_hash,
    hash_transaction,
)


class Test_BlockHeader(unittest.TestCase):
    def test_golden_vector(self):
        """ Version 1 with all other fields zero hashes to a fixed value """
        header = BlockHeader.empty()
        data = header.to_bytes()
        self.assertEqual(len(data), HEADER_SIZE)
        self.assertEqual(data, b"\x00\x00\x00\x01" + bytes(168))
        self.assertEqual(
            hexlify(compute_block_hash(header)),
            "448945ff2107f71bd7530cbaf719fe94c516c3f60b6a4808de37f8f28113567b",
        )

    def test_nonce_changes_hash(self):
        header = BlockHeader.empty()
        other = replace(header, nonce=1)
        self.assertNotEqual(compute_block_hash(header), compute_block_hash(other))
        self.assertEqual(len(compute_block_hash(other)), 32)

    def test_field_order(self):
        header = replace(
            BlockHeader.empty(),
            index=0x0102,
            timestamp=0x0A0B0C0D,
            nonce=7,
            user_id=b"\xAA" * 32,
        )
        data = header.to_bytes()
        self.assertEqual(data[0:4], b"\x00\x00\x00\x01")
        # index is a 32 byte big-endian integer
        self.assertEqual(data[4:36], bytes(30) + b"\x01\x02")
        self.assertEqual(data[100:104], b"\x0a\x0b\x0c\x0d")
        self.assertEqual(data[104:108], b"\x00\x00\x00\x07")
        self.assertEqual(data[108:140], b"\xAA" * 32)
        self.assertEqual(BlockHeader.from_bytes(data), header)

    def test_wrong_header_size(self):
        with self.assertRaises(ValueError):
            BlockHeader.from_bytes(bytes(171))


class Test_TransactionRecord(unittest.TestCase):
    def setUp(self):
        self.tx = TransactionRecord(
            kind=TransactionKind.DoseEvent,
            patient_id=b"\x01" * 32,
            payload=b"\x10\x20",
            created_at=0x01020304,
        )

    def test_canonical_bytes(self):
        self.assertEqual(
            self.tx.to_bytes(),
            b"\x03" + b"\x01" * 32 + b"\x01\x02\x03\x04" + b"\x00\x00\x00\x02" + b"\x10\x20",
        )
        tx, offset = TransactionRecord.from_bytes(self.tx.to_bytes())
        self.assertEqual(tx, self.tx)
        self.assertEqual(offset, 43)

    def test_hash_over_canonical_bytes(self):
        self.assertEqual(hash_transaction(self.tx), sha256(self.tx.to_bytes()))
        # serializing twice gives the same digest
        copy = replace(self.tx)
        self.assertEqual(hash_transaction(copy), hash_transaction(self.tx))

    def test_empty_payload(self):
        tx = replace(self.tx, payload=b"")
        self.assertEqual(len(tx.to_bytes()), 41)
        self.assertNotEqual(
            hexlify(hash_transaction(tx)),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855",
        )

    def test_payload_change_changes_digest(self):
        other = replace(self.tx, payload=b"\x10\x21")
        self.assertNotEqual(hash_transaction(other), hash_transaction(self.tx))

    def test_bad_sizes(self):
        with self.assertRaises(ValueError):
            replace(self.tx, patient_id=b"\x01" * 31)
        with self.assertRaises(ValueError):
            replace(self.tx, created_at=2 ** 32)

    def test_truncated(self):
        data = self.tx.to_bytes()
        with self.assertRaises(ValueError):
            TransactionRecord.from_bytes(data[:-1])
        with self.assertRaises(ValueError):
            TransactionRecord.from_bytes(data[:20])


class Test_ApprovalDigest(unittest.TestCase):
    def test_miner_id_order(self):
        a = MinerApproval(miner_id=b"\x01" * 32, signature=b"\xAA" * 32)
        b = MinerApproval(miner_id=b"\x02" * 32, signature=b"\xBB" * 32)
        expected = sha256(b"\xAA" * 32 + b"\xBB" * 32)
        self.assertEqual(approval_digest((a, b)), expected)
        self.assertEqual(approval_digest((b, a)), expected)

    def test_no_approvals(self):
        self.assertEqual(
            hexlify(approval_digest(())),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855",
        )


if __name__ == "__main__":
    unittest.main()
