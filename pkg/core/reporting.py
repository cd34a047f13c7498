import logging
from datetime import datetime
from pathlib import Path
from typing import List, Optional, Sequence

from reportlab.lib import colors
from reportlab.lib.enums import TA_CENTER
from reportlab.lib.pagesizes import A4
from reportlab.lib.styles import ParagraphStyle, getSampleStyleSheet
from reportlab.lib.units import inch
from reportlab.platypus import Paragraph, SimpleDocTemplate, Spacer, Table, TableStyle

from core.certify import Certificate
from core.config import default_output_dir
from core.experiments import FenceStats

logger = logging.getLogger(__name__)

TABLE_STYLE = TableStyle([
    ('BACKGROUND', (0, 0), (-1, 0), colors.HexColor('#2e5c8a')),
    ('TEXTCOLOR', (0, 0), (-1, 0), colors.whitesmoke),
    ('ALIGN', (0, 0), (-1, -1), 'CENTER'),
    ('FONTNAME', (0, 0), (-1, 0), 'Helvetica-Bold'),
    ('FONTSIZE', (0, 0), (-1, 0), 9),
    ('BOTTOMPADDING', (0, 0), (-1, 0), 6),
    ('GRID', (0, 0), (-1, -1), 1, colors.black),
    ('FONTSIZE', (0, 1), (-1, -1), 8),
    ('ROWBACKGROUNDS', (0, 1), (-1, -1), [colors.white, colors.HexColor('#f5f5f5')]),
    ('VALIGN', (0, 0), (-1, -1), 'MIDDLE'),
])


class ReportGenerator:
    """Generate PDF summaries of fence experiments and certificates."""

    def __init__(self, reports_dir: Optional[Path] = None):
        self.reports_dir = Path(reports_dir) if reports_dir else default_output_dir() / "reports"
        self.reports_dir.mkdir(parents=True, exist_ok=True)

    @staticmethod
    def fence_rows(stats: FenceStats) -> List[List[str]]:
        rows = [['k', 'Reps', 'Mean A', 'Std err', 'k d^-k A', 'Root visits']]
        for r in stats.rows():
            rows.append([
                str(r['k']),
                str(r['reps']),
                f"{r['mean_A']:.3f}",
                f"{r['stderr_A']:.3f}",
                f"{r['scaled']:.5f}",
                f"{r['mean_root_visits']:.3f}",
            ])
        return rows

    @staticmethod
    def certificate_rows(certificates: Sequence[Certificate]) -> List[List[str]]:
        rows = [['Matrix', 'y', 'Power', 'Max row sum', 'Result']]
        for c in certificates:
            y = f"{c.y.numerator}/{c.y.denominator}" if c.y is not None else '-'
            rows.append([c.matrix, y, str(c.power), f"{c.max_row_sum_float:.10f}", 'PASS' if c.passed else 'FAIL'])
        return rows

    def generate_report(
        self,
        header_lines: Sequence[str],
        fence: Optional[FenceStats] = None,
        certificates: Sequence[Certificate] = (),
        name: str = "frogtrees",
    ) -> str:
        """
        Generate an A4 PDF report.

        Args:
            header_lines: Reproducibility header (version, seed, config hash)
            fence: Fence statistics to tabulate, if any
            certificates: Certificates to tabulate
            name: Stem of the report file name

        Returns:
            Path to generated PDF file
        """
        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        report_path = self.reports_dir / f"{name}_{timestamp}.pdf"

        doc = SimpleDocTemplate(
            str(report_path),
            pagesize=A4,
            rightMargin=0.5*inch,
            leftMargin=0.5*inch,
            topMargin=0.5*inch,
            bottomMargin=0.5*inch
        )

        elements = []
        styles = getSampleStyleSheet()

        title_style = ParagraphStyle(
            'CustomTitle',
            parent=styles['Heading1'],
            fontSize=18,
            textColor=colors.HexColor('#1a5490'),
            spaceAfter=6,
            alignment=TA_CENTER,
            fontName='Helvetica-Bold'
        )

        heading_style = ParagraphStyle(
            'CustomHeading',
            parent=styles['Heading2'],
            fontSize=11,
            textColor=colors.HexColor('#2e5c8a'),
            spaceAfter=4,
            spaceBefore=4,
            fontName='Helvetica-Bold'
        )

        normal_style = ParagraphStyle(
            'CustomNormal',
            parent=styles['Normal'],
            fontSize=9,
            spaceAfter=2
        )

        elements.append(Paragraph("Frog Model Report", title_style))
        elements.append(Spacer(1, 0.1*inch))

        elements.append(Paragraph(f"<b>Date & Time:</b> {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}", normal_style))
        for line in header_lines:
            elements.append(Paragraph(line.lstrip('# '), normal_style))
        elements.append(Spacer(1, 0.15*inch))

        if fence is not None:
            elements.append(Paragraph(f"Stunning fences on the {fence.d}-ary tree", heading_style))
            table = Table(self.fence_rows(fence), colWidths=[0.6*inch, 0.8*inch, 1.1*inch, 1.1*inch, 1.3*inch, 1.3*inch])
            table.setStyle(TABLE_STYLE)
            elements.append(table)
            if fence.aborted:
                elements.append(Paragraph(f"<i>{fence.aborted} replicate(s) aborted at the step cap</i>", normal_style))
            elements.append(Spacer(1, 0.15*inch))

        if certificates:
            elements.append(Paragraph("Row-sum certificates", heading_style))
            table = Table(self.certificate_rows(certificates), colWidths=[1.0*inch, 0.8*inch, 0.8*inch, 2.0*inch, 1.0*inch])
            table.setStyle(TABLE_STYLE)
            elements.append(table)

        if fence is None and not certificates:
            elements.append(Paragraph("<i>Nothing to report</i>", normal_style))

        doc.build(elements)
        logger.info("report written to %s", report_path)
        return str(report_path)
