"""gradmix: data-mixture optimization for embedded corpora.

Regroups a corpus by clustering its embeddings, then retunes per-cluster
sampling weights during training using the Gram matrix of per-domain
final-layer gradients. Ships numerical validators for the supporting
results and a closed-form FLOPs cost model for comparing mixture methods.
"""

__version__ = "0.1.0"
