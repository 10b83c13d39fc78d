import json
import os

import pytest

os.environ.setdefault("HF_HUB_OFFLINE", "1")
os.environ.setdefault("TRANSFORMERS_OFFLINE", "1")

TOY_TOKENS = [
    "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
    "the", "movie", "was", "it", "all", "in",
    "great", "good", "fine", "terrible", "awful", "bad",
    "plot", "acting", "boring", "brilliant", "dull", "fun",
    ".", ",", "really", "very", "not",
]


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory):
    """A small randomly initialized fill-mask model saved locally.

    Random weights are enough for smoke purposes: the contract under test
    is softmax rows at the mask position, not prediction quality.
    """
    import torch
    from transformers import BertConfig, BertForMaskedLM, BertTokenizer

    root = tmp_path_factory.mktemp("toy_model")
    vocab_file = root / "vocab.txt"
    vocab_file.write_text("\n".join(TOY_TOKENS) + "\n")
    tokenizer = BertTokenizer(str(vocab_file), do_lower_case=True)
    torch.manual_seed(0)
    config = BertConfig(
        vocab_size=len(TOY_TOKENS),
        hidden_size=32,
        num_hidden_layers=1,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=64,
    )
    model = BertForMaskedLM(config)
    model_dir = root / "model"
    model.save_pretrained(model_dir)
    tokenizer.save_pretrained(model_dir)
    return model_dir


@pytest.fixture
def toy_records():
    texts = [
        ("the movie was great", 1),
        ("it was really fun", 1),
        ("brilliant acting", 1),
        ("very good plot", 1),
        ("not bad at all", 1),
        ("the movie was terrible", 0),
        ("it was boring", 0),
        ("awful dull plot", 0),
        ("really bad acting", 0),
        ("very dull and boring", 0),
    ]
    return [(t, lbl) for t, lbl in texts]


@pytest.fixture
def toy_jsonl(tmp_path, toy_records):
    path = tmp_path / "records.jsonl"
    with open(path, "w") as fh:
        for text, label in toy_records:
            fh.write(json.dumps({"text": text, "label": label}) + "\n")
    return path
