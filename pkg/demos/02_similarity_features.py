"""The three feature families computed on a reference/student answer pair.

Handcrafted count features and fuzzy ratios need only the texts; the
vector-similarity set needs per-answer embeddings, supplied here by the
deterministic hash provider (swap in `file:` or `http:` providers for
real transformer embeddings).
"""

from asag import HashProvider, lex_features, vecsim_features
from asag.lexfeat import LEXFEAT_COLUMNS, porter_stem, tokenize
from asag.vecsim import VECSIM_COLUMNS

reference = "The stack stores activation records using last in, first out ordering."
student = "A stack keeps activation records in LIFO order."

print("tokens(reference):", tokenize(reference))
print("stems:", [porter_stem(t) for t in tokenize(reference)])

record = lex_features(reference, student)
print("\nlexical features:")
for name in LEXFEAT_COLUMNS:
    print(f"  {name:<20} {getattr(record, name)}")

provider = HashProvider(dim=256)
ref_vec = provider.embed_text(reference)
stu_vec = provider.embed_text(student)
vec_record = vecsim_features(ref_vec, stu_vec)
print("\nvector-similarity features (hash embedder, dim 256):")
for name in VECSIM_COLUMNS:
    print(f"  {name:<12} {getattr(vec_record, name): .6f}")

# pair embeddings (cross-encoder style): order matters
ab = provider.embed_pair(reference, student)
ba = provider.embed_pair(student, reference)
print(f"\npair vector dim {ab.shape[0]}; swapped-order cosine: {float(ab @ ba):.4f}")
