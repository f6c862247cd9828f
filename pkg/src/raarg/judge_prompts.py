"""Prompt templates for every judge format.

Templates are module-level constants; builders only fill slots (topic,
documents, arguments, dimension ordering). Keeping the text here, away
from parsing logic, makes the wording auditable at a glance.
"""

from __future__ import annotations

from typing import Sequence

# Canonical listing of the 15 argumentation-quality dimensions: the three
# local sub-dimensions precede their parent dimension (cogency), the five
# rhetoric sub-dimensions precede effectiveness, and the three global
# sub-dimensions precede reasonableness; overall quality closes the list.
QUALITY_DIMENSIONS = (
    "local_acceptability",
    "local_relevance",
    "local_sufficiency",
    "cogency",
    "credibility",
    "emotional_appeal",
    "clarity",
    "appropriateness",
    "arrangement",
    "effectiveness",
    "global_acceptability",
    "global_relevance",
    "global_sufficiency",
    "reasonableness",
    "overall_quality",
)

_DIMENSION_QUESTIONS = {
    "local_acceptability": "How would you rate the acceptability of the premises of the author's argument?",
    "local_relevance": "How would you rate the relevance of the premises of the author's argument?",
    "local_sufficiency": "How would you rate the sufficiency of the premises of the author's argument?",
    "cogency": "How would you rate the cogency of the author's argument?",
    "credibility": "How would you rate the credibility of the author's argumentation?",
    "emotional_appeal": "How would you rate the success of the author's argumentation in making an emotional appeal?",
    "clarity": "How would you rate the clarity of the author's argumentation?",
    "appropriateness": "How would you rate the appropriateness of the author's argumentation?",
    "arrangement": "How would you rate the arrangement of the author's argumentation?",
    "effectiveness": "How would you rate the effectiveness of the author's argumentation?",
    "global_acceptability": "How would you rate the global acceptability of the author's argumentation?",
    "global_relevance": "How would you rate the global relevance of the author's argumentation?",
    "global_sufficiency": "How would you rate the global sufficiency of the author's argumentation?",
    "reasonableness": "How would you rate the reasonableness of the author's argumentation?",
    "overall_quality": "How would you rate the overall quality of the author's argumentation?",
}

_DIMENSION_DEFINITIONS = {
    "local_acceptability": (
        "Local Acceptability: A premise of an argument should be seen as "
        "acceptable if it is worthy of being believed, i.e., if you rationally "
        "think it is true or if you see no reason for not believing that it may "
        "be true. If you identify more than one premise in the comment, try to "
        "adequately weight the acceptability of each premise when judging about "
        "their \"aggregate\" acceptability, unless there are particular premises "
        "that dominate your view of the author's argumentation."
    ),
    "local_relevance": (
        "Local Relevance: A premise of an argument should be seen as relevant "
        "if it contributes to the acceptance or rejection of the argument's "
        "conclusion, i.e., if you think it is worthy of being considered as a "
        "reason, evidence, or similar regarding the conclusion. If you identify "
        "more than one premise in the comment, try to adequately weight the "
        "relevance of each premise when judging about their \"aggregate\" "
        "relevance, unless there are particular premises that dominate your "
        "view of the author's argumentation. You should be open to see a "
        "premise as relevant even if it does not match your own stance on the "
        "issue."
    ),
    "local_sufficiency": (
        "Local Sufficiency: The premises of an argument should be seen as "
        "sufficient if, together, they provide enough support to make it "
        "rational to draw the argument's conclusion."
    ),
    "cogency": (
        "Cogency: An argument should be seen as cogent if it has individually "
        "acceptable premises that are relevant to the argument's conclusion and "
        "that are sufficient to draw the conclusion."
    ),
    "credibility": (
        "Credibility: An argumentation should be seen as credible if it conveys "
        "arguments and similar in a way that makes the author worthy of "
        "credence."
    ),
    "emotional_appeal": (
        "Emotional Appeal: An argumentation should be seen as successful in "
        "making an emotional appeal if it creates emotions in a way that makes "
        "the target audience more open to the author's arguments."
    ),
    "clarity": (
        "Clarity: An argumentation should be seen as clear if it uses correct "
        "and widely unambiguous language as well as if it avoids unnecessary "
        "complexity and deviation from the discussed issue."
    ),
    "appropriateness": (
        "Appropriateness: An argumentation should be seen as appropriate if the "
        "used language supports the creation of credibility and emotions as "
        "well as if it is proportional to the discussed issue."
    ),
    "arrangement": (
        "Arrangement: An argumentation should be seen as well-arranged if it "
        "presents the given issue, the composed arguments, and its conclusion "
        "in the right order."
    ),
    "effectiveness": (
        "Effectiveness: An argumentation should be seen as effective if it "
        "persuades the target audience of, or corroborates agreement with, the "
        "author's stance on the discussed issue."
    ),
    "global_acceptability": (
        "Global Acceptability: An argumentation should be seen as globally "
        "acceptable if everyone from the expected target audience would accept "
        "both the consideration of the stated arguments for the discussed issue "
        "and the manner in which they are stated."
    ),
    "global_relevance": (
        "Global Relevance: An argumentation should be seen as globally relevant "
        "if it contributes to the resolution of the given issue, i.e., if it "
        "provides arguments and/or other information that help to arrive at an "
        "ultimate conclusion."
    ),
    "global_sufficiency": (
        "Global Sufficiency: An argumentation should be globally sufficient if "
        "it adequately rebuts counter-arguments to its conclusion that can be "
        "anticipated."
    ),
    "reasonableness": (
        "Reasonableness: An argumentation should be reasonable if it "
        "contributes to resolving the issue in a sufficient and acceptable way "
        "to everyone from the expected target audience."
    ),
    "overall_quality": (
        "Overall Quality: Try to judge about the overall quality based on all "
        "those of your ratings that you think influence the overall quality of "
        "the given argumentation. If there is anything not covered by these "
        "ratings that influences your view of the author's argumentation, also "
        "take that into account."
    ),
}


def dimension_block(ordering: Sequence[str]) -> str:
    """Numbered dimension listing in the requested order."""
    parts = []
    for i, dim in enumerate(ordering, start=1):
        parts.append(
            f"{i}) {dim}: {_DIMENSION_QUESTIONS[dim]}\n\n{_DIMENSION_DEFINITIONS[dim]}"
        )
    return "\n\n".join(parts)


def documents_block(doc_texts: Sequence[str]) -> str:
    return "\n".join(
        f"Document {i}:\n{text}" for i, text in enumerate(doc_texts, start=1)
    )


DIRECT_TEMPLATE = """You are a RELEVANCE grader, evaluating the relevance of the given context of evidence DOCUMENTS in relation to the provided controversial TOPIC.
Output a numerical score from 0 to 10, where 0 indicates the least relevance and 10 represents the highest relevance.
Scoring guidelines:
- Consider the degree of coverage of the TOPIC by the DOCUMENTS, as well as the relevance to different aspects of the TOPIC.
- Relevance score should increase as the DOCUMENTS provide relevant context to more parts or aspects of the TOPIC.
- Long and short DOCUMENTS are to be treated equally in terms of scoring potential.

Your output should be in the following JSON format only. Provide a brief explanation (2-4 lines) of your analysis:
{{ "explanation": "Your explanation here", "score": your_score }}

Do not output anything else apart from the JSON.

TOPIC: {topic}

DOCUMENTS:
{documents}
"""

STATIC_RUBRIC_TEMPLATE = """You are a RELEVANCE grader, evaluating the relevance and quality of the given context of evidence DOCUMENTS in relation to the provided controversial TOPIC. Assess the DOCUMENTS based on the following criteria and provide a boolean score (True or False) for each. Additionally, provide a brief explanation (2-4 lines) of your analysis.

1. Direct Relevance to the Topic: Do the DOCUMENTS collectively address the core aspects of the controversial TOPIC?
2. Breadth of Coverage: Do the DOCUMENTS provide context relevant to multiple parts or aspects of the TOPIC?
3. Quality of Evidence: Is the information in the DOCUMENTS credible and supportive of arguments related to the TOPIC?
4. Applicability to Argumentation: Are the DOCUMENTS helpful for constructing a well-rounded argument for or against the TOPIC?
5. Consistency with Topic Relevance: Are the DOCUMENTS consistently relevant throughout, without significant divergence into unrelated areas?
6. Noise and Unrelated Content: Is the presence of noisier or unrelated DOCUMENTS minimal? (Lower scores for higher noise levels)

Output Format:
Your output should be in the following JSON format only. Provide a brief explanation (2-4 lines) of your analysis:
{{ "explanation": "Your explanation here", "scores": {{ "direct_relevance": true_or_false, "breadth_of_coverage": true_or_false, "quality_of_evidence": true_or_false, "applicability_to_argumentation": true_or_false, "consistency_with_topic_relevance": true_or_false, "noise_and_unrelated_content": true_or_false }} }}

You should evaluate strictly and carefully. Do not output anything else apart from the JSON.

TOPIC: {topic}

DOCUMENTS:
{documents}
"""

G_EVAL_CRITERIA = """Evaluation Criteria:
Context Relevance (1-5) - Do the DOCUMENTS collectively address the core aspects of the controversial TOPIC? Do the DOCUMENTS provide context relevant to multiple parts or aspects of the TOPIC? Is the information in the DOCUMENTS credible and supportive of arguments related to the TOPIC? Are the DOCUMENTS helpful for constructing a well-rounded argument for or against the TOPIC? Are the DOCUMENTS consistently relevant throughout, without significant divergence into unrelated areas? Is the presence of noisier or unrelated DOCUMENTS minimal?"""

G_EVAL_STEPS_TEMPLATE = """You will be given a set of documents retrieved for a controversial topic, and they are to be rated on one metric. Please make sure you read and understand these instructions carefully.

{criteria}

Based on the evaluation criteria above, generate a concise numbered list of evaluation steps that an evaluator should follow to assess the context relevance of the documents and assign a rating between 1 and 5.

Output only the numbered evaluation steps.
"""

G_EVAL_APPLY_TEMPLATE = """You will be given a set of documents retrieved for a controversial topic. Your task is to rate the documents on one metric. Please make sure you read and understand these instructions carefully.

{criteria}

Evaluation Steps:
{steps}

You should only output the following JSON:
{{ "score": your_score }}

TOPIC: {topic}

DOCUMENTS:
{documents}
"""

QUERY_RUBRIC_TEMPLATE = """You are tasked with generating a list of 20 'nuggets' based solely on the given query and its stance. A nugget is a key piece of information or point that might support or refute the query's stance. Next, evaluate the given context of DOCUMENTS and assess how many of the generated nuggets can be inferred from these DOCUMENTS. For each nugget, assign a score between 1 and 5, depending on how well the DOCUMENTS cover that nugget, where 1 means poorly covered and 5 means thoroughly covered.

Output the results in the following JSON format:
{{ "nuggets": [ {{"the first nugget": score}}, {{"the second nugget": score}}, ... {{"the 20th nugget": score}} ] }}

Ensure that the model evaluates strictly based on the provided context and does not generate any additional information beyond the given instructions.

QUERY: {topic}
STANCE: {stance}

DOCUMENTS:
{documents}
"""

RAG_RUBRIC_TEMPLATE = """You are tasked with performing the following analysis based on a given query, its stance (Pro or Con), provided DOCUMENTS, and two arguments (Argument 1 and Argument 2). Your goal is to assess context relevance, answer relevance, answer groundedness, and argument preference evaluation.

Instructions:

Context Relevance:
- Generate a list of 20 nuggets based solely on the given query and its stance. A nugget is a key piece of information or point that might support or refute the query's stance.
- Evaluate how well each nugget is covered by the provided DOCUMENTS.
- Assign a score between 1 and 5 to each nugget, where:
  - 1 = Poorly covered by the DOCUMENTS.
  - 5 = Thoroughly covered by the DOCUMENTS.

Answer Relevance:
- Using the same 20 nuggets from the previous step, evaluate how well each nugget is addressed by Argument 1 and Argument 2 separately.
- Assign a score between 1 and 5 for each nugget under each argument, where:
  - 1 = Nugget is minimally or not at all covered by the argument.
  - 5 = Nugget is fully covered by the argument.

Answer Groundedness:
- Generate a new list of 20 key nuggets derived solely from the content of the provided DOCUMENTS.
- Evaluate how well each nugget is covered by Argument 1 and Argument 2 separately.
- Assign a score between 1 and 5 for each nugget under each argument, where:
  - 1 = Poor coverage in the argument.
  - 5 = Excellent coverage in the argument.

Argument Preference Evaluation:
- Based on the evaluations from the previous steps, determine which argument best addresses each nugget.
- For each nugget, indicate your preference as:
  - "Argument 1"
  - "Argument 2"
  - "Both"

Output Format:
Provide your results in a JSON object with the following structure:
{{ "context_relevance": {{ "nuggets": {{ "nugget statement": score, ... }} }},
"answer_relevance": {{ "nuggets": {{ "nugget statement": {{ "Argument 1": score, "Argument 2": score }}, ... }} }},
"answer_groundedness": {{ "nuggets": {{ "nugget statement": {{ "Argument 1": score, "Argument 2": score }}, ... }} }},
"argument_preference_evaluation": {{ "nuggets": {{ "nugget statement": "Argument 1", ... }} }} }}

Only provide your output in a valid JSON format and nothing else.

QUERY: {topic}
STANCE: {stance}

DOCUMENTS:
{documents}

Argument 1:
{argument_1}

Argument 2:
{argument_2}
"""

RAG_DIRECT_TEMPLATE = """Task: You are tasked with evaluating two arguments on a controversial topic. One argument is written by a human, and the other is generated by a model, but you are not told which is which. Your evaluation should consist of four key metrics:

Context Relevance:
- Evaluate the relevance of the provided evidence documents to the controversial topic for both arguments. Criteria:
  - Evidence Alignment: Does the document contain information supporting or opposing the topic?
  - Specificity: Is the content detailed in relation to the topic?
  - Usefulness: Is the document useful for building an argument?

Answer Relevance:
- Assess how relevant each argument is in addressing the controversial topic. Criteria:
  - Topic Adherence: Does the argument directly address the topic with a clear stance (for or against)?
  - Specificity: Is the argument specific and detailed in its response?
  - Persuasiveness: Is the argument persuasive and comprehensive?

Answer Groundedness:
- Evaluate how well each argument is grounded in the provided evidence documents. Criteria:
  - Evidence Accuracy: Does the argument accurately reflect the content of the evidence documents?
  - Evidence Citation: Does the argument cite specific parts of the evidence?
  - Consistency: Is the argument consistent with the facts from the evidence?

Argument Preference Evaluation:
- After evaluating the context relevance, answer relevance, and groundedness, determine which argument is more effective overall. Criteria:
  - Coverage of Evidence: Which argument addresses key points and evidence better?
  - Depth of Reasoning: Which argument offers more detailed insights?
  - Coherence and Structure: Which argument is more logically structured and coherent?
  - Stance Consistency: Which argument better adheres to the specified stance?

Output Format:
Your output should be in the following JSON format only. For each of the four metrics, provide a score (for context relevance, answer relevance, and answer groundedness) and a preference (for argument preference evaluation). Scores range from 1 to 5. Additionally, provide a brief explanation (2-4 lines) of your analysis for each score or preference.
{{ "context_relevance": {{ "explanation": "Your explanation here", "score_argument_1": your_score, "score_argument_2": your_score }},
"answer_relevance": {{ "explanation": "Your explanation here", "score_argument_1": your_score, "score_argument_2": your_score }},
"answer_groundedness": {{ "explanation": "Your explanation here", "score_argument_1": your_score, "score_argument_2": your_score }},
"argument_preference_evaluation": {{ "explanation": "Your explanation here", "preference": "Argument 1" or "Argument 2" or "Tie" }} }}

TOPIC: {topic}
STANCE: {stance}

DOCUMENTS:
{documents}

Argument 1:
{argument_1}

Argument 2:
{argument_2}
"""

LISTWISE_QUALITY_HEADER = """You will be provided with an argument for a controversial topic, and you will be provided 15 dimensions to annotate the argumentation quality. You need to read the argument and evaluate each of these 15 dimensions on a scale from {scale_min} to {scale_max}, where:

{scale_legend}

You should provide your output only as a json with the dimension as the key and the value which contains the explanation and the rating.

The following are the dimensions later followed by the argument:

{dimensions}

TOPIC: {topic}

ARGUMENT:
{argument}
"""

SCALE_LEGEND_1_3 = "3 = High\n\n2 = Medium\n\n1 = Low."

SCALE_LEGEND_0_5 = "5 = Excellent\n\n3 = Moderate\n\n0 = Very poor."

LISTWISE_RAG_HEADER = """You will be provided with a (pro or con) argument for a controversial topic, along with retrieved documents. Your goal is to assess context relevance, answer relevance, answer groundedness, and then 15 other argumentation metrics. For each of these metrics, you need to return an explanation and a rating.{per_doc_clause} Your evaluation should consist of the following metrics:

{context_relevance_heading}: Evaluate the relevance of {context_relevance_object} to the controversial topic for the given argument.
Criteria:
- Evidence Alignment: Does the document contain information supporting or opposing the topic?
- Specificity: Is the content detailed in relation to the topic?
- Usefulness: Is the document useful for building an argument?

answer_relevance: Assess how relevant the argument is in addressing the controversial topic.
Criteria:
- Topic Adherence: Does the argument directly address the topic with a clear stance (for or against)?
- Specificity: Is the argument specific and detailed in its response?
- Persuasiveness: Is the argument persuasive and comprehensive?

answer_groundedness: Evaluate how well the argument is grounded in the provided evidence documents.
Criteria:
- Evidence Accuracy: Does the argument accurately reflect the content of the evidence documents?
- Evidence Citation: Does the argument cite specific parts of the evidence?
- Consistency: Is the argument consistent with the facts from the evidence?

Argument Quality: After evaluating the context relevance, answer relevance, and groundedness, you need to annotate the argumentation quality based on 15 dimensions. You need to read the argument and evaluate each of these 15 dimensions on a scale from {scale_min} to {scale_max}. You should provide your output only as a JSON with the dimension as the key and the value which contains the explanation and the rating.

The following are the dimensions which are followed by the argument:

{dimensions}

All ratings, including {context_relevance_key}, answer_relevance, and answer_groundedness, are on a scale from {scale_min} to {scale_max}.
Your output must be a single JSON object with the keys "{context_relevance_key}", "answer_relevance", "answer_groundedness", and one key per quality dimension; every value holds an explanation and a rating{per_doc_value_clause}.
Only provide your output in a valid JSON format and nothing else.

TOPIC: {topic}
STANCE: {stance}

DOCUMENTS:
{documents}

ARGUMENT:
{argument}
"""

HALLUCINATION_TEMPLATE = """You are provided with a set of 'documents' and an 'argument' that draws content from these documents. Your task is to:

1. Identify {num} sentences in the argument that directly quote or reference information from the documents, such as numbers, quotes, or the names of notable individuals or organizations. Typically, these sentences will have citations at the end, like [1], [2], etc., and will align closely with the content in the documents.
2. For each identified sentence, create a modified version that contradicts the original sentence. The modified sentence should also contradict the information in the corresponding document.

You can use various approaches to introduce contradictions. For example:
- The sentence "Albert Einstein developed the theory of relativity, which transformed our understanding of space and time" could be changed to "Albert Einstein developed the theory of relativity and discovered the structure of DNA, revolutionizing biology."
- Similarly, "Mount Everest is the tallest mountain in the world, standing at 8,848 meters above sea level" could be modified to "Mount Everest is the tallest mountain in the world, standing at 9,500 meters above sea level, and it is home to an ancient civilization."

Once you've made the modifications, return a new version of the argument where the identified sentences are replaced with their modified versions. All other sentences should remain unchanged.

You should generate your output in a JSON format and nothing else. The output should be in JSON format, structured as follows:
{{
  "modifications": ["...", ...],
  "modified_argument": ".."
}}

Here are the documents and the argument:

DOCUMENTS:
{documents}

ARGUMENT:
{argument}
"""


def build_listwise_quality_prompt(
    topic_title: str,
    argument_text: str,
    ordering: Sequence[str],
    scale: tuple[int, int] = (1, 3),
) -> str:
    legend = SCALE_LEGEND_1_3 if scale == (1, 3) else SCALE_LEGEND_0_5
    return LISTWISE_QUALITY_HEADER.format(
        scale_min=scale[0],
        scale_max=scale[1],
        scale_legend=legend,
        dimensions=dimension_block(ordering),
        topic=topic_title,
        argument=argument_text,
    )


def build_listwise_rag_prompt(
    topic_title: str,
    stance: str,
    doc_texts: Sequence[str],
    argument_text: str,
    ordering: Sequence[str],
    scale: tuple[int, int] = (0, 5),
    per_document: bool = False,
) -> str:
    if per_document:
        heading = "context_relevance (a list)"
        obj = "each of the provided evidence documents"
        per_doc_clause = (
            " Context relevance must be assessed at the granularity of each "
            "document."
        )
        per_doc_value_clause = (
            '; "context_relevance" is a list with one entry per document, in '
            "document order"
        )
    else:
        heading = "context_relevance"
        obj = "the provided evidence documents collectively"
        per_doc_clause = ""
        per_doc_value_clause = ""
    return LISTWISE_RAG_HEADER.format(
        per_doc_clause=per_doc_clause,
        context_relevance_heading=heading,
        context_relevance_object=obj,
        context_relevance_key="context_relevance",
        per_doc_value_clause=per_doc_value_clause,
        scale_min=scale[0],
        scale_max=scale[1],
        dimensions=dimension_block(ordering),
        topic=topic_title,
        stance=stance,
        documents=documents_block(doc_texts),
        argument=argument_text,
    )


def build_direct_prompt(topic_title: str, doc_texts: Sequence[str]) -> str:
    return DIRECT_TEMPLATE.format(topic=topic_title, documents=documents_block(doc_texts))


def build_static_rubric_prompt(topic_title: str, doc_texts: Sequence[str]) -> str:
    return STATIC_RUBRIC_TEMPLATE.format(
        topic=topic_title, documents=documents_block(doc_texts)
    )


def build_g_eval_steps_prompt() -> str:
    return G_EVAL_STEPS_TEMPLATE.format(criteria=G_EVAL_CRITERIA)


def build_g_eval_apply_prompt(topic_title: str, doc_texts: Sequence[str], steps: str) -> str:
    return G_EVAL_APPLY_TEMPLATE.format(
        criteria=G_EVAL_CRITERIA,
        steps=steps,
        topic=topic_title,
        documents=documents_block(doc_texts),
    )


def build_query_rubric_prompt(
    topic_title: str, stance: str, doc_texts: Sequence[str]
) -> str:
    return QUERY_RUBRIC_TEMPLATE.format(
        topic=topic_title, stance=stance, documents=documents_block(doc_texts)
    )


def build_rag_rubric_prompt(
    topic_title: str,
    stance: str,
    doc_texts: Sequence[str],
    argument_1: str,
    argument_2: str,
) -> str:
    return RAG_RUBRIC_TEMPLATE.format(
        topic=topic_title,
        stance=stance,
        documents=documents_block(doc_texts),
        argument_1=argument_1,
        argument_2=argument_2,
    )


def build_rag_direct_prompt(
    topic_title: str,
    stance: str,
    doc_texts: Sequence[str],
    argument_1: str,
    argument_2: str,
) -> str:
    return RAG_DIRECT_TEMPLATE.format(
        topic=topic_title,
        stance=stance,
        documents=documents_block(doc_texts),
        argument_1=argument_1,
        argument_2=argument_2,
    )


def build_hallucination_prompt(
    num: int, doc_texts: Sequence[str], argument_text: str
) -> str:
    return HALLUCINATION_TEMPLATE.format(
        num=num, documents=documents_block(doc_texts), argument=argument_text
    )
