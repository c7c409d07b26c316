#!/usr/bin/env python3
"""Independent SipHash-2-4 oracle.

Implements SipHash-2-4 from the algorithm description (SipRound network,
2 compression rounds, 4 finalization rounds) and prints the 64 standard
test vectors: key = 00 01 .. 0f, message = first N bytes 00..N-1 for
N in 0..63, output as a little-endian uint64.

Used once to freeze the expected values in test_flow_hash.cpp; kept here
so the table can be regenerated and audited.
"""

MASK = 0xFFFFFFFFFFFFFFFF


def rotl(x, b):
    return ((x << b) | (x >> (64 - b))) & MASK


def sipround(v0, v1, v2, v3):
    v0 = (v0 + v1) & MASK
    v1 = rotl(v1, 13)
    v1 ^= v0
    v0 = rotl(v0, 32)
    v2 = (v2 + v3) & MASK
    v3 = rotl(v3, 16)
    v3 ^= v2
    v0 = (v0 + v3) & MASK
    v3 = rotl(v3, 21)
    v3 ^= v0
    v2 = (v2 + v1) & MASK
    v1 = rotl(v1, 17)
    v1 ^= v2
    v2 = rotl(v2, 32)
    return v0, v1, v2, v3


def siphash24(k0, k1, data):
    v0 = k0 ^ 0x736F6D6570736575
    v1 = k1 ^ 0x646F72616E646F6D
    v2 = k0 ^ 0x6C7967656E657261
    v3 = k1 ^ 0x7465646279746573

    n_full = len(data) // 8
    for i in range(n_full):
        m = int.from_bytes(data[8 * i:8 * i + 8], "little")
        v3 ^= m
        for _ in range(2):
            v0, v1, v2, v3 = sipround(v0, v1, v2, v3)
        v0 ^= m

    tail = data[8 * n_full:]
    m = (len(data) & 0xFF) << 56
    m |= int.from_bytes(tail + bytes(8 - len(tail)), "little") & ((1 << 56) - 1)
    v3 ^= m
    for _ in range(2):
        v0, v1, v2, v3 = sipround(v0, v1, v2, v3)
    v0 ^= m

    v2 ^= 0xFF
    for _ in range(4):
        v0, v1, v2, v3 = sipround(v0, v1, v2, v3)
    return (v0 ^ v1 ^ v2 ^ v3) & MASK


def main():
    k0 = int.from_bytes(bytes(range(8)), "little")
    k1 = int.from_bytes(bytes(range(8, 16)), "little")
    for n in range(64):
        msg = bytes(range(n))
        print("0x%016xULL," % siphash24(k0, k1, msg))


if __name__ == "__main__":
    main()
