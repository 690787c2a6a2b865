// Built-in prompt templates. Generated from templates/*.txt; keep in sync
// (the unit suite diffs them against the shipped files).

#pragma once

#include <map>
#include <string>

namespace itemlab::detail {

inline const std::map<std::string, std::string>& builtin_templates() {
  static const std::map<std::string, std::string> templates = {
      {"vanilla",
       R"TPL(You are an instructor preparing a quiz about the following learning materials:
{L}

You are looking for a quiz question that satisfies the following requirement:
{requirement}
{requirement_description}

You are given 2 candidate quiz questions Output (a) and Output (b). Your task is to identify which of Output (a) and Output (b) better satisfies the requirement.

# Output (a): {Q1}

# Output (b): {Q2}

# Which question better satisfies the requirement, Output (a) or Output (b)? Do not provide any explanation. Your response should be either "Output (a)" or "Output (b)"
)TPL"},
      {"cot",
       R"TPL(You are an instructor preparing a quiz about the following learning materials:
{L}

You are looking for a quiz question that satisfies the following requirement:
{requirement}
{requirement_description}

You are given 2 candidate quiz questions Output (a) and Output (b). Your task is to identify which of Output (a) and Output (b) better satisfies the requirement.

# Output (a): {Q1}

# Output (b): {Q2}

# Which question better satisfies the requirement, Output (a) or Output (b)? First provide a step-by-step explanation of your reasoning, then state your final answer. Your final answer must be either "Output (a)" or "Output (b)"
)TPL"},
      {"metrics_generate",
       R"TPL(You are an instructor preparing a quiz about the following learning materials:
{L}

You are looking for a quiz question that satisfies the following requirement:
{requirement}
{requirement_description}

Generate a concise set of metrics that a well-constructed quiz question should adhere to in order to satisfy the requirement. List each metric on its own line.
)TPL"},
      {"metrics_judge",
       R"TPL(You are an instructor preparing a quiz about the following learning materials:
{L}

You are looking for a quiz question that satisfies the following requirement:
{requirement}
{requirement_description}

You previously generated the following metrics that a well-constructed quiz question should adhere to:
{metrics}

You are given 2 candidate quiz questions Output (a) and Output (b). Your task is to identify which of Output (a) and Output (b) better satisfies the requirement, judged against the metrics above.

# Output (a): {Q1}

# Output (b): {Q2}

# Which question better satisfies the requirement, Output (a) or Output (b)? Your response should be either "Output (a)" or "Output (b)"
)TPL"},
      {"reference_generate",
       R"TPL(You are an instructor preparing a quiz about the following learning materials:
{L}

You are looking for a quiz question that satisfies the following requirement:
{requirement}
{requirement_description}

Write one example of a desirable quiz question that satisfies the requirement. Include the answer choices if the question is multiple-choice.
)TPL"},
      {"reference_judge",
       R"TPL(You are an instructor preparing a quiz about the following learning materials:
{L}

You are looking for a quiz question that satisfies the following requirement:
{requirement}
{requirement_description}

Here is an example of a desirable quiz question that satisfies the requirement:
{reference}

You are given 2 candidate quiz questions Output (a) and Output (b). Your task is to identify which of Output (a) and Output (b) better satisfies the requirement. Use the example above as a reference when judging.

# Output (a): {Q1}

# Output (b): {Q2}

# Which question better satisfies the requirement, Output (a) or Output (b)? Your response should be either "Output (a)" or "Output (b)"
)TPL"},
      {"swap_synthesize",
       R"TPL(You previously evaluated the same two candidate quiz questions twice, with their presentation order swapped, and reached contradictory conclusions.

You are looking for a quiz question that satisfies the following requirement:
{requirement}
{requirement_description}

# Output (a): {Q1}

# Output (b): {Q2}

# First evaluation (questions presented in the order above):
{response_original}

# Second evaluation (presentation order swapped, so "Output (a)" there refers to Output (b) above and vice versa):
{response_swapped}

# Synthesize the two evaluations and make a final decision, naming the questions as presented above. Which question better satisfies the requirement, Output (a) or Output (b)? Your response should be either "Output (a)" or "Output (b)"
)TPL"},
      {"qgsms_step1",
       R"TPL(Given the following learning materials:
{L}

Consider students with various understanding in a scenario where a quiz about the above learning materials is being conducted. Ensure that you generate at least 10 roles for the scenario. For each student, provide a detailed description that includes their name and their understanding of the lecture content. The distribution of understanding of lecture content must mimic that in a real classroom.

List every student on its own line, in the format:
<number>. <name>: <description of their understanding>
)TPL"},
      {"qgsms_step2",
       R"TPL(Given the following learning materials:
{L}

Below is the list of students and their reported understanding of the learning materials:
{profiles}

Given the following quiz questions about the lecture content:
Question 1: {Q1}

Question 2: {Q2}

For each student, predict whether the student will correctly answer each question (based on the student's understanding, the question's difficulty, guessing factors, etc.). If you predict "incorrect", specify which distractor confuses the student.

Report one line per student, in the format:
<name> | Question 1: Correct or Incorrect (confused by <distractor>) | Question 2: Correct or Incorrect (confused by <distractor>)
)TPL"},
      {"qgsms_step3",
       R"TPL(You are interested in finding a quiz question that satisfies the following requirement:
{requirement}

You are given 2 output quiz questions Output (a) and Output (b) and the analysis of the responses of each student who attempted the questions. Your task is to identify which of Output (a) and Output (b) better satisfies requirement {requirement} based on the question content and student performance.
{requirement_description}

# Output (a): {Q1}

# Output (b): {Q2}

# Consider Students Performance:
{performance}

# Which question better satisfies {requirement}, Output (a) or Output (b)? Your response should be either "Output (a)" or "Output (b)"
)TPL"},
      {"qgen_df",
       R"TPL(Given the following learning materials:
{L}

Generate 4-choice quiz questions to test students' understanding of the lecture. The generated questions should have diverse difficulty.
- The more difficult a question, the fewer number of students can correctly answer it.
- There must be 2 (two) 'easy-level' questions, 2 (two) 'medium-level' questions, and 2 (two) 'hard-level' questions.

Format every question exactly as:
Question <number> (<level>): <question text>
A) <text of option A>
B) <text of option B>
C) <text of option C>
D) <text of option D>
Answer: <letter of the correct option>
)TPL"},
      {"qgen_dc",
       R"TPL(Given the following learning materials:
{L}

Generate 4-choice quiz questions to test students' understanding of the learning materials. The generated questions should have diverse discrimination ability.
- A question with high discrimination is more effective at distinguishing between high-performing and low-performing students. An example of a question with low discrimination is when neither high-performing nor low-performing students can answer the question correctly, or when all students can answer the question correctly.
- There must be 2 (two) 'low-discrimination' questions, 2 (two) 'medium-discrimination' questions, and 2 (two) 'high-discrimination' questions.

Format every question exactly as:
Question <number> (<level>): <question text>
A) <text of option A>
B) <text of option B>
C) <text of option C>
D) <text of option D>
Answer: <letter of the correct option>
)TPL"},
      {"qgen_de",
       R"TPL(Given the following learning materials:
{L}

Generate 4-choice quiz questions to test students' understanding of the lecture. The generated questions should have diverse number of effective distractors.
- An effective distractor is one that will be selected by at least 5% of the students.
- Specifically, there must be 2 (two) questions with NO effective distractors, 2 (two) questions with exactly ONE effective distractor, 2 (two) questions with exactly TWO effective distractors, and 2 (two) questions with all THREE effective distractors.

Format every question exactly as:
Question <number> (<level>): <question text>
A) <text of option A>
B) <text of option B>
C) <text of option C>
D) <text of option D>
Answer: <letter of the correct option>
)TPL"},
  };
  return templates;
}

}  // namespace itemlab::detail
