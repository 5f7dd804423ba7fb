"""Minimal external-estimator child used by the protocol tests.

Modes: identity (reply with mixture channel 0), short (reply with a wrong
length), hang (read the frame, never reply).
"""

import struct
import sys
import time


def main():
    mode = sys.argv[1] if len(sys.argv) > 1 else "identity"
    handshake = sys.stdin.buffer.readline().split()
    n_bins = int(handshake[0])
    while True:
        header = sys.stdin.buffer.read(4)
        if len(header) < 4:
            return 0
        (length,) = struct.unpack("<I", header)
        payload = sys.stdin.buffer.read(length)
        if mode == "hang":
            time.sleep(60)
            return 0
        reply = payload[: n_bins * 8]  # channel 0 (re, im) pairs
        if mode == "short":
            reply = reply[: len(reply) // 2]
        sys.stdout.buffer.write(struct.pack("<I", len(reply)) + reply)
        sys.stdout.buffer.flush()


if __name__ == "__main__":
    sys.exit(main())
