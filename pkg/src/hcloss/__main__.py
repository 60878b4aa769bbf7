from hcloss.cli.main import main

main()
