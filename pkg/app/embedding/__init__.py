from .hankel import (
    EmbeddingSpec,
    HankelTensor,
    dump_tensor,
    fold_matrix,
    hankelize,
    inverse_hankelize,
    load_tensor,
    multiplicity,
    st_fold,
    st_unfold,
    unfold_matrix,
)
