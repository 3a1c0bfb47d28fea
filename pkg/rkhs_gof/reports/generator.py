import logging
from typing import Any, Dict, Optional, Sequence

from fpdf import FPDF

logger = logging.getLogger("Report-Generator")


class StudyReport(FPDF):
    """
    PDF template for goodness-of-fit power study summaries.
    """

    provenance: str = ""

    def header(self) -> None:
        self.set_fill_color(15, 76, 92)
        self.rect(0, 0, 210, 32, "F")

        self.set_font("Helvetica", "B", 20)
        self.set_text_color(255, 255, 255)
        self.cell(0, 16, "RKHS Goodness-of-Fit Power Study", 0, 1, "C")

        self.set_font("Helvetica", "I", 10)
        self.cell(0, 0, "Covariate models of a two-compartment PK model", 0, 1, "C")
        self.ln(18)

    def footer(self) -> None:
        self.set_y(-15)
        self.set_font("Helvetica", "I", 8)
        self.set_text_color(128, 128, 128)
        self.cell(0, 10, f"Page {self.page_no()} | {self.provenance}", 0, 0, "C")


def generate_power_report(
    results: Sequence[Any], output_path: str, provenance: Optional[Dict[str, Any]] = None
) -> str:
    """
    Writes the rejection table of one or more power studies to a PDF.

    Args:
        results (Sequence[PowerResult]): Finished power studies.
        output_path (str): Destination of the PDF.
        provenance (Optional[Dict[str, Any]]): Printed in the footer (seed, config hash).

    Returns:
        str: The path to the generated report.
    """
    logger.info(f"Generating power study report at: {output_path}")
    pdf = StudyReport()
    pdf.provenance = " | ".join(f"{k}: {v}" for k, v in (provenance or {}).items())
    pdf.add_page()

    # 1. Study design
    pdf.set_font("Helvetica", "B", 14)
    pdf.set_text_color(15, 76, 92)
    pdf.cell(0, 10, "1. Study Design", 0, 1)
    pdf.set_font("Helvetica", "", 10)
    pdf.set_text_color(50, 50, 50)
    if results:
        first = results[0]
        design = (
            f"Level alpha = {first.alpha:g}, M = {first.M} Monte Carlo replicates per test. "
            f"Data simulated from the {first.truth_kind} covariate model. "
            "Rows report the rejection rate with its binomial standard error; for the true "
            "family this is the type I error, for misspecified families the power."
        )
    else:
        design = "No completed power studies."
    pdf.multi_cell(0, 6, design)
    pdf.ln(6)

    # 2. Rejection rates
    pdf.set_font("Helvetica", "B", 14)
    pdf.set_text_color(15, 76, 92)
    pdf.cell(0, 10, "2. Rejection Rates", 0, 1)

    pdf.set_fill_color(240, 240, 240)
    pdf.set_text_color(50, 50, 50)
    pdf.set_font("Helvetica", "B", 10)
    widths = (28, 46, 22, 28, 36, 30)
    labels = ("Scenario", "Null family", "Statistic", "Datasets", "Rejection rate", "Std. error")
    for width, label in zip(widths, labels):
        pdf.cell(width, 9, label, 1, 0, "C", True)
    pdf.ln()

    pdf.set_font("Helvetica", "", 9)
    for result in results:
        for row in result.to_frame().itertuples(index=False):
            cells = (
                row.scenario,
                row.family,
                row.statistic,
                f"{row.n_datasets} ({row.n_failed} failed)",
                f"{100 * row.rejection_rate:.1f}%",
                f"{100 * row.standard_error:.1f}%",
            )
            for width, text in zip(widths, cells):
                pdf.cell(width, 8, str(text), 1, 0, "C")
            pdf.ln()

    pdf.output(output_path)
    return output_path
