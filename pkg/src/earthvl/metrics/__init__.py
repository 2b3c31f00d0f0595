from .mc import McRecord, overall_accuracy, rmse_counting
from .captions import OeRecord, corpus_bleu, rouge_l, cider, caption_report
from .stats import answer_distribution_stats

__all__ = [
    "McRecord",
    "overall_accuracy",
    "rmse_counting",
    "OeRecord",
    "corpus_bleu",
    "rouge_l",
    "cider",
    "caption_report",
    "answer_distribution_stats",
]
