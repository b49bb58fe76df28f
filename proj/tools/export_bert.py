#!/usr/bin/env python3
# Copyright 2026 The sgdst Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Exports a Hugging Face BERT encoder for `model.encoder = pretrained`.

Writes config.json, vocab.txt and weights.bin to the output directory. The
weights file is the magic "SGDSTW01", a little-endian uint64 header length, a
JSON header listing tensor names and shapes, then float32 data in row-major
order. The pooler is dropped.
"""

import argparse
import json
import os
import struct
import sys

MAGIC = b"SGDSTW01"


def encoder_tensors(model):
    """(name, float32 numpy array) pairs in state-dict order, pooler excluded."""
    out = []
    for name, tensor in model.state_dict().items():
        if name.startswith("bert."):
            name = name[len("bert."):]
        if name.startswith("pooler.") or not (
                name.startswith("embeddings.") or name.startswith("encoder.")):
            continue
        if name.endswith("position_ids") or name.endswith("token_type_ids"):
            continue  # buffers, not weights
        out.append((name, tensor.detach().cpu().float().numpy()))
    return out


def write_weights(path, tensors):
    header = {"tensors": [{"name": n, "shape": list(a.shape)} for n, a in tensors]}
    blob = json.dumps(header).encode("utf-8")
    tmp = path + ".tmp"
    with open(tmp, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<Q", len(blob)))
        f.write(blob)
        for _, array in tensors:
            f.write(array.astype("<f4", copy=False).tobytes(order="C"))
    os.replace(tmp, path)


def export(model, out_dir, vocab=None):
    """Writes config.json, weights.bin and, when given, vocab.txt."""
    os.makedirs(out_dir, exist_ok=True)
    config = model.config.to_dict()
    with open(os.path.join(out_dir, "config.json"), "w") as f:
        json.dump(config, f, indent=2, sort_keys=True)
    write_weights(os.path.join(out_dir, "weights.bin"), encoder_tensors(model))
    if vocab is not None:
        with open(os.path.join(out_dir, "vocab.txt"), "w", encoding="utf-8") as f:
            for token in vocab:
                f.write(token + "\n")


def main(argv):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--model", default="bert-base-uncased",
                        help="Hugging Face model name or local directory")
    parser.add_argument("--out", required=True, help="output directory")
    args = parser.parse_args(argv)
    try:
        from transformers import BertModel, BertTokenizer
    except ImportError:
        sys.exit("export_bert.py needs `pip install torch transformers`")
    model = BertModel.from_pretrained(args.model, add_pooling_layer=False)
    model.eval()
    tokenizer = BertTokenizer.from_pretrained(args.model)
    vocab = [t for t, _ in sorted(tokenizer.vocab.items(), key=lambda kv: kv[1])]
    export(model, args.out, vocab)
    count = sum(a.size for _, a in encoder_tensors(model))
    print(f"wrote {args.out}: {count} encoder parameters, {len(vocab)} tokens")


if __name__ == "__main__":
    main(sys.argv[1:])
